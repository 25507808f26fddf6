# Exact samplers for the Gaussian, l_p cone measure and l_p ball models
# Reproducible through counter-based Philox streams keyed by (grid, replicate, role)

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np

from config.defaults import ROLE_DIRECTIONS, ROLE_SAMPLES
from utils.core import Direction, ModelSpec, ModelVariant, Params, SampleSet, SeedLineage
from utils.errors import InvalidModel, NonPositiveDimension, OutOfRange
from utils.predictors import log_volume_bpn


@dataclass(frozen=True)
class RngStream:
    """
    Handle on one independent random substream.

    The substream is a Philox generator keyed by
    SeedSequence(master_seed, spawn_key=(grid_index, replicate_index, role)),
    so distinct (grid_index, replicate_index, role) triples never share output.
    Each call to generator() restarts the substream from its beginning.
    """
    master_seed: int
    replicate_index: int = 0
    role: int = ROLE_SAMPLES
    grid_index: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise OutOfRange(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if min(self.replicate_index, self.role, self.grid_index) < 0:
            raise OutOfRange("Stream indices must be non-negative")

    @property
    def stream_id(self) -> Tuple[int, int]:
        return (self.replicate_index, self.role)

    @property
    def lineage(self) -> SeedLineage:
        return SeedLineage(self.master_seed, self.grid_index, self.replicate_index, self.role)

    def child(self, role: int) -> "RngStream":
        return replace(self, role=role)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.grid_index, self.replicate_index, self.role)
        )
        return np.random.Generator(np.random.Philox(seq))


RngLike = Union[RngStream, np.random.Generator]


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError(f"Expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_dimension(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise NonPositiveDimension(f"Dimension must be a positive integer, got {n!r}")


def _check_exponent(p: float) -> None:
    if not math.isfinite(p) or p < 1.0:
        raise InvalidModel(f"Exponent p must be finite and >= 1, got {p}")


def _shape(size: Optional[int], n: Optional[int] = None) -> Tuple[int, ...]:
    dims = () if size is None else (int(size),)
    return dims if n is None else dims + (int(n),)


# MARK: Scalar and Vector Samplers
def sample_gaussian_vector(n: int, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
    """
    Standard Gaussian vector in R^n.

    Parameters
    ----------
    n : int
        Dimension
    rng : RngStream or np.random.Generator
        Source of randomness
    size : int, optional
        Number of i.i.d. vectors; when given the result has shape (size, n)

    Returns
    -------
    np.ndarray
        Gaussian draws
    """
    _check_dimension(n)
    return _generator(rng).standard_normal(_shape(size, n))


def _p_generalized(gen: np.random.Generator, p: float, shape: Tuple[int, ...]) -> np.ndarray:
    shape_param = 1.0 / p
    if shape_param < 1.0:
        # Gamma(a) = Gamma(a + 1) * U^{1/a}
        gamma = gen.standard_gamma(shape_param + 1.0, size=shape)
        gamma = gamma * gen.random(size=shape) ** p
    else:
        gamma = gen.standard_gamma(shape_param, size=shape)
    signs = np.where(gen.random(size=shape) < 0.5, -1.0, 1.0)
    return signs * gamma ** shape_param


def sample_p_generalized_scalar(
    p: float, rng: RngLike, size: Optional[int] = None
) -> Union[float, np.ndarray]:
    """
    Draw from the density exp(-|t|^p) / (2 Gamma(1 + 1/p)).

    Implemented as sign * W^{1/p} with W ~ Gamma(1/p, 1).
    """
    _check_exponent(p)
    draws = _p_generalized(_generator(rng), float(p), _shape(size))
    if size is None:
        return float(draws)
    return draws


def _lp_norm(x: np.ndarray, p: float) -> np.ndarray:
    peak = np.max(np.abs(x), axis=-1, keepdims=True)
    peak = np.where(peak > 0.0, peak, 1.0)
    return (peak * np.sum((np.abs(x) / peak) ** p, axis=-1, keepdims=True) ** (1.0 / p))[..., 0]


def _cone(gen: np.random.Generator, n: int, p: float, size: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    g = _p_generalized(gen, p, _shape(size, n))
    norms = _lp_norm(g, p)
    return g / np.expand_dims(norms, -1), norms


def sample_cone_lp(
    n: int, p: float, rng: RngLike, size: Optional[int] = None
) -> Tuple[np.ndarray, Union[float, np.ndarray]]:
    """
    Cone-measure draw on the l_p sphere via Y = G / ||G||_p.

    Parameters
    ----------
    n : int
        Dimension
    p : float
        Exponent, 1 <= p < inf
    rng : RngStream or np.random.Generator
        Source of randomness
    size : int, optional
        Number of i.i.d. draws

    Returns
    -------
    Tuple[np.ndarray, float or np.ndarray]
        Y with ||Y||_p = 1 and the pre-normalization norm ||G||_p,
        which is independent of Y
    """
    _check_dimension(n)
    _check_exponent(p)
    y, norms = _cone(_generator(rng), int(n), float(p), size)
    if size is None:
        return y, float(norms)
    return y, norms


def _uniform_ball(gen: np.random.Generator, n: int, p: float, size: Optional[int]) -> np.ndarray:
    y, _ = _cone(gen, n, p, size)
    radius = gen.random(size=_shape(size)) ** (1.0 / n)
    return np.expand_dims(radius, -1) * y


def sample_uniform_ball_lp(n: int, p: float, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
    """Uniform point of B_p^n as U^{1/n} times a cone-measure draw."""
    _check_dimension(n)
    _check_exponent(p)
    return _uniform_ball(_generator(rng), int(n), float(p), size)


def isotropic_ball_factor(n: int, p: float) -> float:
    """|B_p^n|^{-1/n}, the dilation making B_p^n volume one."""
    return math.exp(-log_volume_bpn(n, p) / n)


def sample_isotropic_ball_lp(n: int, p: float, rng: RngLike, size: Optional[int] = None) -> np.ndarray:
    """Uniform point of the volume-one dilate B_p^n / |B_p^n|^{1/n}."""
    _check_dimension(n)
    _check_exponent(p)
    return isotropic_ball_factor(int(n), float(p)) * _uniform_ball(_generator(rng), int(n), float(p), size)


# MARK: Sample Sets and Directions
def sample_set(model: ModelSpec, params: Params, rng: RngLike) -> SampleSet:
    """
    Draw N independent vectors from the model.

    Deterministic given the stream; the lineage of an RngStream is recorded.
    """
    gen = _generator(rng)
    n, N = params.n, params.N

    if model.variant is ModelVariant.GAUSSIAN:
        vectors = gen.standard_normal((N, n))
    elif model.variant is ModelVariant.CONE_LP:
        vectors, _ = _cone(gen, n, model.p, N)
    elif model.variant is ModelVariant.UNIFORM_BALL_LP:
        vectors = _uniform_ball(gen, n, model.p, N)
    else:
        vectors = isotropic_ball_factor(n, model.p) * _uniform_ball(gen, n, model.p, N)

    if model.scale != 1.0:
        vectors = vectors * model.scale

    lineage = rng.lineage if isinstance(rng, RngStream) else SeedLineage(master_seed=None)
    return SampleSet(vectors=vectors, model=model, seed_lineage=lineage)


def sample_unit_directions(n: int, count: int, rng: RngLike, antithetic: bool = False) -> np.ndarray:
    """
    count x n matrix of uniform directions on S^{n-1}.

    With antithetic set, Gaussian draws are paired with their reflection
    through the coordinate sign pattern (+, -, +, -, ...); both members of a
    pair are uniform on the sphere.
    """
    _check_dimension(n)
    if count < 1:
        raise OutOfRange(f"Direction count must be >= 1, got {count}")
    gen = _generator(rng)

    if antithetic:
        half = (count + 1) // 2
        g = gen.standard_normal((half, n))
        signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        g = np.stack([g, g * signs], axis=1).reshape(2 * half, n)[:count]
    else:
        g = gen.standard_normal((count, n))

    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_unit_direction(n: int, rng: RngLike) -> Direction:
    """Uniform direction on S^{n-1} by Gaussian normalization."""
    return Direction(sample_unit_directions(n, 1, rng)[0])


def direction_stream(master_seed: int, replicate_index: int, grid_index: int = 0) -> RngStream:
    return RngStream(master_seed, replicate_index, ROLE_DIRECTIONS, grid_index)
