# Domain types and the order-statistic kernel shared by every estimator
# Params, ModelSpec, Direction, SampleSet and EstimateReport live here

import logging
import math
import numbers
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from config.defaults import UNIT_NORM_TOL
from utils.errors import (
    DimensionMismatch,
    EllOutOfRange,
    EmptyInput,
    InvalidModel,
    KOutOfRange,
    NonFiniteQ,
    NonIntegerEll,
    NonPositiveDimension,
    NonPositiveSampleCount,
    NotUnitVector,
    OutOfRange,
    QBelowOne,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


# MARK: Model Specification
class ModelVariant(str, Enum):
    GAUSSIAN = "gaussian"
    CONE_LP = "cone"
    UNIFORM_BALL_LP = "ball"
    ISOTROPIC_BALL_LP = "isoball"


_VARIANT_LABELS = {
    ModelVariant.GAUSSIAN: "GaussianStandard",
    ModelVariant.CONE_LP: "ConeLp",
    ModelVariant.UNIFORM_BALL_LP: "UniformBallLp",
    ModelVariant.ISOTROPIC_BALL_LP: "IsotropicUniformBallLp",
}


@dataclass(frozen=True)
class ModelSpec:
    """
    Random law generating the vectors X_1, ..., X_N.

    Parameters
    ----------
    variant : ModelVariant
        Gaussian, cone measure on the l_p sphere, uniform l_p ball or its
        isotropic (volume-one) rescaling
    p : float, optional
        Exponent of the l_p variants, finite and at least 1
    scale : float
        Non-negative factor applied to every draw
    """
    variant: ModelVariant
    p: Optional[float] = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.variant, ModelVariant):
            try:
                object.__setattr__(self, "variant", ModelVariant(self.variant))
            except ValueError as e:
                raise InvalidModel(f"Unknown model variant: {self.variant!r}") from e

        if self.variant is ModelVariant.GAUSSIAN:
            object.__setattr__(self, "p", None)
        else:
            if self.p is None:
                raise InvalidModel(f"{self.variant.value} model requires an exponent p")
            p = float(self.p)
            if not math.isfinite(p) or p < 1.0:
                raise InvalidModel(f"Exponent p must be finite and >= 1, got {self.p}")
            object.__setattr__(self, "p", p)

        scale = float(self.scale)
        if not math.isfinite(scale) or scale < 0.0:
            raise InvalidModel(f"Scale must be finite and >= 0, got {self.scale}")
        object.__setattr__(self, "scale", scale)

    @classmethod
    def gaussian(cls, scale: float = 1.0) -> "ModelSpec":
        return cls(ModelVariant.GAUSSIAN, scale=scale)

    @classmethod
    def cone_lp(cls, p: float, scale: float = 1.0) -> "ModelSpec":
        return cls(ModelVariant.CONE_LP, p=p, scale=scale)

    @classmethod
    def uniform_ball_lp(cls, p: float, scale: float = 1.0) -> "ModelSpec":
        return cls(ModelVariant.UNIFORM_BALL_LP, p=p, scale=scale)

    @classmethod
    def isotropic_ball_lp(cls, p: float, scale: float = 1.0) -> "ModelSpec":
        return cls(ModelVariant.ISOTROPIC_BALL_LP, p=p, scale=scale)

    @classmethod
    def parse(cls, text: str) -> "ModelSpec":
        """
        Parse a short model description such as ``gaussian`` or ``cone:1.5``.

        Parameters
        ----------
        text : str
            ``<variant>[:<p>]`` where variant is gaussian, cone, ball or isoball

        Returns
        -------
        ModelSpec
            Parsed model

        Raises
        ------
        InvalidModel
            If the variant is unknown or p is missing or malformed
        """
        name, _, exponent = text.strip().lower().partition(":")
        try:
            variant = ModelVariant(name)
        except ValueError as e:
            raise InvalidModel(f"Unknown model variant: {name!r}") from e

        if variant is ModelVariant.GAUSSIAN:
            return cls(variant)
        if not exponent:
            raise InvalidModel(f"Model {name!r} needs an exponent, e.g. {name}:2")
        try:
            p = float(exponent)
        except ValueError as e:
            raise InvalidModel(f"Malformed exponent {exponent!r}") from e
        return cls(variant, p=p)

    @property
    def label(self) -> str:
        base = _VARIANT_LABELS[self.variant]
        if self.p is None:
            return base
        return f"{base}(p={self.p:g})"

    @property
    def is_isotropic(self) -> bool:
        """Whether the law is isotropic log-concave (Gaussian or volume-one ball)."""
        return self.variant in (ModelVariant.GAUSSIAN, ModelVariant.ISOTROPIC_BALL_LP)

    def with_scale(self, scale: float) -> "ModelSpec":
        return replace(self, scale=scale)


# MARK: Parameters
@dataclass(frozen=True)
class Params:
    """
    The quadruple (n, N, ell, q) defining one random body K_{N,ell,q}.

    Build instances through validate_params.
    """
    n: int
    N: int
    ell: int
    q: float

    @property
    def degenerate(self) -> bool:
        """Fewer points than dimensions; the body then lies in a subspace."""
        return self.N < self.n

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _as_positive_int(value: Any, name: str, error: type) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise error(f"{name} must be a positive integer, got {value!r}")
    if not float(value).is_integer() or value < 1:
        raise error(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def validate_params(n: Any, N: Any, ell: Any, q: Any) -> Params:
    """
    Validate raw inputs and build a Params instance.

    Integral floats (``3.0``) are accepted for the integer fields.

    Parameters
    ----------
    n : int
        Dimension
    N : int
        Number of random vectors
    ell : int
        Order-statistic depth, 1 <= ell <= N
    q : float
        Moment exponent, finite and at least 1

    Returns
    -------
    Params
        Validated parameters

    Raises
    ------
    NonPositiveDimension, NonPositiveSampleCount, NonIntegerEll, EllOutOfRange, NonFiniteQ, QBelowOne
        On the corresponding violation
    """
    n_int = _as_positive_int(n, "n", NonPositiveDimension)
    N_int = _as_positive_int(N, "N", NonPositiveSampleCount)

    if isinstance(ell, bool) or not isinstance(ell, numbers.Real) or not float(ell).is_integer():
        raise NonIntegerEll(f"ell must be an integer, got {ell!r}")
    ell_int = int(ell)
    if ell_int < 1 or ell_int > N_int:
        raise EllOutOfRange(f"ell must satisfy 1 <= ell <= N={N_int}, got {ell_int}")

    if isinstance(q, bool) or not isinstance(q, numbers.Real):
        raise NonFiniteQ(f"q must be a real number, got {q!r}")
    q_float = float(q)
    if not math.isfinite(q_float):
        raise NonFiniteQ(f"q must be finite, got {q!r}")
    if q_float < 1.0:
        raise QBelowOne(f"q must be >= 1, got {q_float}")

    params = Params(n=n_int, N=N_int, ell=ell_int, q=q_float)
    if params.degenerate:
        logger.warning(f"Degenerate instance: N={N_int} < n={n_int}, body lies in a proper subspace")
    return params


# MARK: Directions and Samples
@dataclass(frozen=True, eq=False)
class Direction:
    """A unit vector theta on the sphere S^{n-1}."""
    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 1 or coords.size == 0:
            raise DimensionMismatch(f"Direction must be a non-empty 1-D vector, got shape {coords.shape}")
        norm = float(np.linalg.norm(coords))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise NotUnitVector(f"Direction must have unit Euclidean norm, got {norm!r}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_vector(cls, vector: ArrayLike) -> "Direction":
        v = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise NotUnitVector("Cannot normalize a zero or non-finite vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "Direction":
        e = np.zeros(n)
        e[index] = 1.0
        return cls(e)

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])


@dataclass(frozen=True)
class SeedLineage:
    master_seed: Optional[int]
    grid_index: int = 0
    replicate_index: int = 0
    role: int = 0


@dataclass(frozen=True, eq=False)
class SampleSet:
    """One realization X_1, ..., X_N stored row-wise in an N x n matrix."""
    vectors: np.ndarray
    model: ModelSpec
    seed_lineage: SeedLineage = field(default_factory=lambda: SeedLineage(master_seed=None))

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] == 0 or vectors.shape[1] == 0:
            raise DimensionMismatch(f"Samples must form a non-empty N x n matrix, got shape {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise OutOfRange("Sample vectors must have finite entries")
        object.__setattr__(self, "vectors", vectors)

    @property
    def N(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def n(self) -> int:
        return int(self.vectors.shape[1])

    def marginals(self, theta: ArrayLike) -> np.ndarray:
        """Inner products <X_i, theta> for every row."""
        x = theta.coords if isinstance(theta, Direction) else np.asarray(theta, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.n:
            raise DimensionMismatch(f"Direction of dimension {x.shape} does not match samples of dimension {self.n}")
        return self.vectors @ x

    def scaled(self, factor: float) -> "SampleSet":
        return SampleSet(self.vectors * factor, self.model.with_scale(self.model.scale * factor), self.seed_lineage)


# MARK: Reports
@dataclass(frozen=True)
class EstimateReport:
    """
    A Monte Carlo estimate with its standard error and provenance.

    n_directions is 0 for fixed-direction estimates.
    """
    value: float
    std_error: float
    n_replicates: int
    n_directions: int
    params: Params
    model: ModelSpec
    seed: int

    def __post_init__(self) -> None:
        if not self.std_error >= 0.0:
            raise OutOfRange(f"std_error must be >= 0, got {self.std_error}")
        if self.n_replicates < 1:
            raise OutOfRange(f"n_replicates must be >= 1, got {self.n_replicates}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n_replicates": self.n_replicates,
            "n_directions": self.n_directions,
            "params": self.params.to_dict(),
            "model": self.model.label,
            "seed": self.seed,
        }


# MARK: Order Statistics
def kth_max(values: ArrayLike, k: Any) -> float:
    """
    Return the k-th largest element, ties counted with multiplicity.

    Parameters
    ----------
    values : array-like
        Finite reals
    k : int
        Rank, 1 <= k <= len(values)

    Returns
    -------
    float
        Element at position k of the descending order

    Raises
    ------
    KOutOfRange
        If k is not an integer in [1, len(values)]
    """
    arr = np.asarray(values, dtype=float).ravel()
    size = arr.shape[0]
    if isinstance(k, bool) or not isinstance(k, numbers.Real) or not float(k).is_integer():
        raise KOutOfRange(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 1 or k > size:
        raise KOutOfRange(f"k must satisfy 1 <= k <= {size}, got {k}")
    return float(np.partition(arr, size - k)[size - k])


def _top_rows(abs_matrix: np.ndarray, ell: int) -> np.ndarray:
    """Rows holding the ell largest entries of every column (unordered)."""
    size = abs_matrix.shape[0]
    if ell == size:
        return abs_matrix
    if ell <= size / 4:
        return np.partition(abs_matrix, size - ell, axis=0)[size - ell:]
    return np.sort(abs_matrix, axis=0)[size - ell:]


def support_power_means(matrix: ArrayLike, ell: int, q: float) -> np.ndarray:
    """
    Column-wise ((1/ell) sum_{k<=ell} kmax |v_i|^q)^{1/q}.

    The column maximum is factored out before taking powers, so the result
    never exceeds the maximum and large q does not overflow.

    Parameters
    ----------
    matrix : array-like
        N x D matrix, one column per direction
    ell : int
        Order-statistic depth
    q : float
        Moment exponent

    Returns
    -------
    np.ndarray
        D power means
    """
    abs_matrix = np.abs(np.asarray(matrix, dtype=float))
    if abs_matrix.ndim == 1:
        abs_matrix = abs_matrix[:, None]
    size = abs_matrix.shape[0]
    if size == 0 or abs_matrix.shape[1] == 0:
        raise EmptyInput("Cannot take order statistics of an empty input")
    validate_params(1, size, ell, q)

    top = _top_rows(abs_matrix, int(ell))
    peak = top.max(axis=0)
    if ell == 1:
        return peak

    positive = peak > 0.0
    safe_peak = np.where(positive, peak, 1.0)
    ratios = top / safe_peak
    means = np.sum(ratios ** q, axis=0) / ell
    return np.where(positive, peak * means ** (1.0 / q), 0.0)


def orderstat_power_mean(values: ArrayLike, ell: int, q: float) -> float:
    """
    ell-deep q-power order-statistic mean of absolute values.

    Equals max |v_i| when ell = 1 and N^{-1/q} ||v||_q when ell = N.

    Raises
    ------
    EmptyInput
        If values is empty
    """
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("Cannot take order statistics of an empty input")
    return float(support_power_means(arr[:, None], ell, q)[0])
