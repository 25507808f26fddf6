# Orlicz function machinery: M_ell built from a distribution, the Gaussian closed form,
# Luxemburg norms, inverses and Legendre conjugates

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, optimize, stats

from config.defaults import CONVEXITY_TOL, MAX_BRACKET_STEPS, QUAD_ABS_TOL, ROOT_RTOL, TAIL_QUANTILE
from utils.errors import (
    EmptyInput,
    IntegrationFailure,
    NoFiniteBracket,
    NotOrliczFunction,
    OutOfRange,
    QBelowOne,
    UnboundedConjugate,
)

logger = logging.getLogger(__name__)

DEFAULT_DOMAIN_HINT = 1e6


# MARK: Distributions
@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """
    Law of a non-negative variable |X|.

    Either backed by a sample (kept sorted ascending) or analytic, in which
    case |X| = Z^power for a frozen scipy law Z >= 0. Analytic laws are
    truncated at the TAIL_QUANTILE quantile of Z when integrating.
    """
    sorted_samples: Optional[np.ndarray] = None
    base: Optional[object] = None
    power: float = 1.0
    name: str = "empirical"
    _suffix_sums: np.ndarray = field(init=False, repr=False)
    _upper: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if (self.sorted_samples is None) == (self.base is None):
            raise OutOfRange("Provide exactly one of sorted_samples or an analytic base law")

        if self.sorted_samples is not None:
            values = np.sort(np.abs(np.asarray(self.sorted_samples, dtype=float).ravel()))
            if values.size == 0:
                raise EmptyInput("Empirical distribution needs at least one sample")
            if not np.all(np.isfinite(values)):
                raise OutOfRange("Samples must be finite")
            object.__setattr__(self, "sorted_samples", values)
            # _suffix_sums[i] = sum of values[i:]
            suffix = np.concatenate((np.cumsum(values[::-1])[::-1], [0.0]))
            object.__setattr__(self, "_suffix_sums", suffix)
            object.__setattr__(self, "_upper", float(values[-1]))
        else:
            object.__setattr__(self, "_suffix_sums", np.zeros(0))
            object.__setattr__(self, "_upper", float(self.base.ppf(TAIL_QUANTILE)))  # type: ignore[attr-defined]

    @classmethod
    def from_samples(cls, values: Sequence[float], name: str = "empirical") -> "EmpiricalDistribution":
        return cls(sorted_samples=np.asarray(values, dtype=float), name=name)

    @classmethod
    def half_normal(cls) -> "EmpiricalDistribution":
        """|g| for a standard normal g."""
        return cls(base=stats.halfnorm(), power=1.0, name="|g|")

    @classmethod
    def gaussian_power(cls, q: float) -> "EmpiricalDistribution":
        """|g|^q for a standard normal g."""
        if q < 1:
            raise QBelowOne(f"q must be >= 1, got {q}")
        return cls(base=stats.halfnorm(), power=float(q), name=f"|g|^{q:g}")

    @classmethod
    def constant(cls, c: float) -> "EmpiricalDistribution":
        return cls(sorted_samples=np.array([float(c)]), name=f"const({c:g})")

    @property
    def is_analytic(self) -> bool:
        return self.base is not None

    @property
    def size(self) -> int:
        return 0 if self.sorted_samples is None else int(self.sorted_samples.shape[0])

    # Analytic helpers work on the Z scale, |X| = Z^power
    def _to_base(self, a: float) -> float:
        return a ** (1.0 / self.power)

    def tail_probability(self, a: float) -> float:
        """P(a <= |X|), restricted to the truncated support for analytic laws."""
        if self.sorted_samples is not None:
            index = int(np.searchsorted(self.sorted_samples, a, side="left"))
            return (self.size - index) / self.size
        z_a = self._to_base(max(a, 0.0))
        if z_a >= self._upper:
            return 0.0
        return float(self.base.sf(z_a) - self.base.sf(self._upper))  # type: ignore[attr-defined]

    def truncated_moment(self, a: float) -> float:
        """
        E[|X| 1{|X| >= a}].

        Exact partial sums for samples; adaptive quadrature over the density
        otherwise.

        Raises
        ------
        IntegrationFailure
            If the quadrature error estimate exceeds QUAD_ABS_TOL
        """
        if self.sorted_samples is not None:
            index = int(np.searchsorted(self.sorted_samples, a, side="left"))
            return float(self._suffix_sums[index] / self.size)

        z_a = self._to_base(max(a, 0.0))
        if z_a >= self._upper:
            return 0.0
        value, error = integrate.quad(
            lambda z: z ** self.power * self.base.pdf(z),  # type: ignore[attr-defined]
            z_a, self._upper, epsabs=QUAD_ABS_TOL / 100, epsrel=1e-12, limit=200,
        )
        if error > QUAD_ABS_TOL:
            raise IntegrationFailure(f"Truncated moment at a={a:g} reached error {error:.3g}")
        return float(value)

    def mean(self) -> float:
        return self.truncated_moment(0.0)


def quantile_function(dist: EmpiricalDistribution, z: float) -> float:
    """
    Decreasing rearrangement X*(z), the (1 - z)-quantile of |X|.

    For samples X* is the step function taking the i-th largest value on
    [(i - 1)/m, i/m).

    Raises
    ------
    OutOfRange
        Unless 0 <= z <= 1
    """
    if not 0.0 <= z <= 1.0:
        raise OutOfRange(f"z must lie in [0, 1], got {z}")
    if dist.sorted_samples is not None:
        m = dist.size
        rank = min(int(math.floor(z * m)), m - 1)
        return float(dist.sorted_samples[m - 1 - rank])
    return float(dist.base.ppf(1.0 - z)) ** dist.power  # type: ignore[attr-defined]


def integrated_quantile(dist: EmpiricalDistribution, beta: float) -> float:
    """
    The integral of X*(z) over [0, beta].

    Equals E[|X| 1{|X| >= X*(beta)}] for continuous laws.
    """
    if not 0.0 <= beta <= 1.0:
        raise OutOfRange(f"beta must lie in [0, 1], got {beta}")
    if dist.sorted_samples is None:
        if beta == 0.0:
            return 0.0
        return dist.truncated_moment(quantile_function(dist, beta))

    m = dist.size
    full = min(int(math.floor(beta * m)), m)
    descending = dist.sorted_samples[::-1]
    total = float(np.sum(descending[:full]))
    if full < m:
        total += (beta * m - full) * float(descending[full])
    return total / m


# MARK: Orlicz Functions
class OrliczFunction:
    """
    Evaluable Orlicz function M with a convexity certificate.

    Construction evaluates M on a grid and checks M(0) = 0, non-negativity,
    monotonicity and convexity (slope increments >= -CONVEXITY_TOL). Functions
    built from a bounded law vanish on an initial segment [0, flat_until];
    beyond it they must be strictly positive. Grid values are cached eagerly,
    so instances are read-only after construction.
    """

    def __init__(
        self,
        func: Callable[[float], float],
        domain_hint: float = DEFAULT_DOMAIN_HINT,
        name: str = "M",
        grid: Optional[Sequence[float]] = None,
    ):
        self._func = func
        self.domain_hint = float(domain_hint)
        self.name = name
        if grid is None:
            grid = np.concatenate(([0.0], np.geomspace(1e-4, min(1e2, self.domain_hint), 64)))
        self.grid = np.unique(np.asarray(grid, dtype=float))
        values = np.array([float(func(t)) for t in self.grid])
        self._cache: Dict[float, float] = dict(zip(self.grid.tolist(), values.tolist()))
        self.flat_until = self._certify(values)

    def _certify(self, values: np.ndarray) -> float:
        grid = self.grid
        if grid[0] != 0.0 or values[0] != 0.0:
            raise NotOrliczFunction(f"{self.name}: M(0) must be 0")
        if np.any(values < 0.0) or not np.all(np.isfinite(values)):
            raise NotOrliczFunction(f"{self.name}: values must be finite and non-negative")
        if np.any(np.diff(values) < -CONVEXITY_TOL * np.maximum(1.0, values[1:])):
            raise NotOrliczFunction(f"{self.name}: not nondecreasing on the certified grid")

        slopes = np.diff(values) / np.diff(grid)
        if np.any(np.diff(slopes) < -CONVEXITY_TOL * np.maximum(1.0, np.abs(slopes[1:]))):
            raise NotOrliczFunction(f"{self.name}: not convex on the certified grid")

        positive = np.nonzero(values > 0.0)[0]
        if positive.size == 0:
            raise NotOrliczFunction(f"{self.name}: identically zero on the certified grid")
        if np.any(values[positive[0]:] <= 0.0):
            raise NotOrliczFunction(f"{self.name}: vanishes after becoming positive")
        return float(grid[positive[0] - 1])

    def __call__(self, t: float) -> float:
        if t < 0.0:
            raise OutOfRange(f"{self.name} is defined on [0, inf), got {t}")
        cached = self._cache.get(t)
        if cached is not None:
            return cached
        return float(self._func(t))

    def __repr__(self) -> str:
        return f"OrliczFunction({self.name}, domain_hint={self.domain_hint:g})"

    # MARK: Factories
    @classmethod
    def power(cls, p: float, scale: float = 1.0) -> "OrliczFunction":
        """M(t) = t^p / scale."""
        if p < 1:
            raise NotOrliczFunction(f"t^p is an Orlicz function only for p >= 1, got {p}")
        return cls(lambda t: t ** p / scale, name=f"t^{p:g}/{scale:g}")

    @classmethod
    def from_distribution(
        cls, dist: EmpiricalDistribution, ell: float, domain_hint: float = DEFAULT_DOMAIN_HINT
    ) -> "OrliczFunction":
        """M_ell of the law of |X|; the grid is scaled by 1/ell."""
        grid = np.concatenate(([0.0], np.geomspace(1e-3, 1e3, 48) / ell))
        return cls(
            lambda s: m_ell_from_distribution(dist, ell, s),
            domain_hint=domain_hint,
            name=f"M_{ell:g}[{dist.name}]",
            grid=grid,
        )

    @classmethod
    def gaussian(cls, ell: float, q: float) -> "OrliczFunction":
        t_star = gaussian_breakpoint(ell, q)
        grid = np.concatenate(([0.0], np.geomspace(1e-2, 1e2, 48) * t_star))
        return cls(lambda t: gaussian_q_orlicz(ell, q, t), name=f"gaussian(ell={ell:g}, q={q:g})", grid=grid)


def m_ell_from_distribution(dist: EmpiricalDistribution, ell: float, s: float) -> float:
    """
    M_ell(s), the integral over t in [0, s] of E[|X| 1{|X| >= 1/(t ell)}].

    Exchanging the integrals gives M_ell(s) = E[(s|X| - 1/ell)_+]
    = s T(a) - P(|X| >= a)/ell with a = 1/(s ell) and T the truncated moment.
    Samples are summed exactly; analytic laws need one quadrature.

    Raises
    ------
    OutOfRange
        If s < 0 or ell <= 0
    IntegrationFailure
        If the quadrature tolerance is not met
    """
    if s < 0.0:
        raise OutOfRange(f"s must be >= 0, got {s}")
    if ell <= 0.0:
        raise OutOfRange(f"ell must be positive, got {ell}")
    if s == 0.0:
        return 0.0

    threshold = 1.0 / (s * ell)
    if dist.sorted_samples is not None:
        index = int(np.searchsorted(dist.sorted_samples, threshold, side="right"))
        count = dist.size - index
        value = (s * dist._suffix_sums[index] - count / ell) / dist.size
    else:
        value = s * dist.truncated_moment(threshold) - dist.tail_probability(threshold) / ell
    return max(float(value), 0.0)


# MARK: Gaussian Closed Form
def _check_gaussian_args(ell: float, q: float) -> None:
    if q < 1:
        raise QBelowOne(f"q must be >= 1, got {q}")
    if ell <= 0:
        raise OutOfRange(f"ell must be positive, got {ell}")


def gaussian_breakpoint(ell: float, q: float) -> float:
    """t* = (1/ell) (2q / (q + 2))^{q/2}, the inflection point of the exponential branch."""
    _check_gaussian_args(ell, q)
    return (2.0 * q / (q + 2.0)) ** (q / 2.0) / ell


def gaussian_tangent_slope(q: float) -> float:
    """Slope of the affine continuation, e^{-(q+2)/2} (q+2)^{1+q/2} / (2^{q/2} q^{1+q/2})."""
    log_slope = (
        -(q + 2.0) / 2.0
        + (1.0 + q / 2.0) * math.log(q + 2.0)
        - (q / 2.0) * math.log(2.0)
        - (1.0 + q / 2.0) * math.log(q)
    )
    return math.exp(log_slope)


def gaussian_q_orlicz(ell: float, q: float, t: float) -> float:
    """
    Piecewise Orlicz function of the Gaussian q-th power case.

    0 at t = 0, (1/ell) exp(-q / (ell t)^{2/q}) on (0, t*), and the tangent
    line at t* beyond, which passes through e^{-(q+2)/2}/ell at t* with
    intercept -2 e^{-q/2} / (e q ell).
    """
    _check_gaussian_args(ell, q)
    if t < 0.0:
        raise OutOfRange(f"t must be >= 0, got {t}")
    if t == 0.0:
        return 0.0
    t_star = gaussian_breakpoint(ell, q)
    if t < t_star:
        return math.exp(-q / (ell * t) ** (2.0 / q)) / ell
    return math.exp(-(q + 2.0) / 2.0) / ell + gaussian_tangent_slope(q) * (t - t_star)


def gaussian_q_orlicz_inverse(ell: float, q: float, y: float) -> float:
    """
    Closed-form inverse of gaussian_q_orlicz.

    Below the breakpoint value the inverse is (1/ell)(q / log(1/(ell y)))^{q/2};
    for y = 1/N this is q^{q/2} / (ell (log(N/ell))^{q/2}).
    """
    _check_gaussian_args(ell, q)
    if y < 0.0:
        raise OutOfRange(f"y must be >= 0, got {y}")
    if y == 0.0:
        return 0.0
    y_star = math.exp(-(q + 2.0) / 2.0) / ell
    if y < y_star:
        return (q / math.log(1.0 / (ell * y))) ** (q / 2.0) / ell
    return gaussian_breakpoint(ell, q) + (y - y_star) / gaussian_tangent_slope(q)


# MARK: Norms, Inverses and Conjugates
def orlicz_inverse(M: OrliczFunction, y: float) -> float:
    """
    Smallest s with M(s) >= y.

    The bracket is found by doubling (or halving) from s = 1, then refined
    with Brent's method to ROOT_RTOL relative accuracy.

    Raises
    ------
    OutOfRange
        If y < 0 or no bracket is found within MAX_BRACKET_STEPS steps
    """
    if y < 0.0 or not math.isfinite(y):
        raise OutOfRange(f"y must be finite and >= 0, got {y}")
    if y == 0.0:
        return 0.0

    hi = 1.0
    steps = 0
    while M(hi) < y:
        hi *= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise OutOfRange(f"y={y:g} is beyond the range of {M.name}")
    lo = hi / 2.0
    steps = 0
    while M(lo) >= y:
        lo /= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise OutOfRange(f"y={y:g} is below the resolvable range of {M.name}")

    return float(optimize.brentq(lambda s: M(s) - y, lo, hi, xtol=lo * ROOT_RTOL * 1e-3, rtol=ROOT_RTOL))


def luxemburg_norm(M: OrliczFunction, x: Sequence[float]) -> float:
    """
    Luxemburg norm inf{rho > 0 : sum M(|x_i| / rho) <= 1}.

    Raises
    ------
    OutOfRange
        If x has non-finite entries
    NoFiniteBracket
        If the modular cannot be bracketed around 1
    """
    values = np.abs(np.asarray(x, dtype=float).ravel())
    if not np.all(np.isfinite(values)):
        raise OutOfRange("Luxemburg norm requires finite entries")
    values = values[values > 0.0]
    if values.size == 0:
        return 0.0
    levels, counts = np.unique(values, return_counts=True)

    def modular(rho: float) -> float:
        return float(sum(count * M(v / rho) for v, count in zip(levels, counts)))

    hi = float(levels[-1])
    steps = 0
    while modular(hi) > 1.0:
        hi *= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise NoFiniteBracket(f"{M.name}: modular stays above 1")
    lo = hi / 2.0
    steps = 0
    while modular(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise NoFiniteBracket(f"{M.name}: modular stays below 1")

    return float(optimize.brentq(lambda rho: modular(rho) - 1.0, lo, hi, xtol=lo * ROOT_RTOL * 1e-3, rtol=ROOT_RTOL))


def legendre_conjugate(M: OrliczFunction, x: float) -> float:
    """
    M*(x) = sup_{t >= 0} [x t - M(t)].

    The objective is concave; the search interval is doubled from t = 1 until
    the objective decreases, then bounded Brent search finds the maximum.

    Raises
    ------
    OutOfRange
        If x < 0
    UnboundedConjugate
        If the objective still increases beyond M.domain_hint
    """
    if x < 0.0 or not math.isfinite(x):
        raise OutOfRange(f"x must be finite and >= 0, got {x}")
    if x == 0.0:
        return 0.0

    def objective(t: float) -> float:
        return x * t - M(t)

    t = 1.0
    while objective(2.0 * t) > objective(t):
        t *= 2.0
        if t > M.domain_hint:
            raise UnboundedConjugate(
                f"{M.name}: sup of {x:g} t - M(t) not attained below domain hint {M.domain_hint:g}"
            )

    upper = 2.0 * t
    result = optimize.minimize_scalar(
        lambda s: -objective(s), bounds=(0.0, upper), method="bounded",
        options={"xatol": upper * 1e-12, "maxiter": 500},
    )
    return max(-float(result.fun), objective(t), 0.0)


def conjugate_function(M: OrliczFunction, domain_hint: float = DEFAULT_DOMAIN_HINT) -> OrliczFunction:
    """M* as an OrliczFunction (certified on a small grid)."""
    grid = np.concatenate(([0.0], np.geomspace(1e-2, 1e1, 16)))
    return OrliczFunction(lambda x: legendre_conjugate(M, x), domain_hint=domain_hint, name=f"{M.name}*", grid=grid)


def conjugate_biconjugate_residual(M: OrliczFunction, t_grid: Sequence[float]) -> float:
    """max relative |M**(t) - M(t)| over t_grid (positive points only)."""
    conjugate = conjugate_function(M)
    residuals = []
    for t in t_grid:
        target = M(t)
        if target <= 0.0:
            continue
        residuals.append(abs(legendre_conjugate(conjugate, t) - target) / target)
    if not residuals:
        raise EmptyInput("t_grid has no point with M(t) > 0")
    return float(max(residuals))


# MARK: Identity Checks and Predictors
@dataclass(frozen=True)
class MStarRow:
    beta: float
    integral: float
    conjugate: float
    target: float
    residual: float
    relative_residual: float


@dataclass(frozen=True)
class MStarReport:
    distribution: str
    ell: float
    rows: List[MStarRow]

    @property
    def max_relative_residual(self) -> float:
        return max(row.relative_residual for row in self.rows)


def verify_mstar_identity(dist: EmpiricalDistribution, ell: float, beta_grid: Sequence[float]) -> MStarReport:
    """
    Residuals of M_ell*(integral of X* over [0, beta]) = beta / ell.

    M_ell is built from the distribution and conjugated numerically; the
    integral of X* is computed independently.

    Raises
    ------
    OutOfRange
        If a beta lies outside (0, 0.9]
    """
    betas = list(beta_grid)
    if not betas:
        raise EmptyInput("beta_grid is empty")
    for beta in betas:
        if not 0.0 < beta <= 0.9:
            raise OutOfRange(f"beta must lie in (0, 0.9], got {beta}")

    M = OrliczFunction.from_distribution(dist, ell)
    rows = []
    for beta in betas:
        integral = integrated_quantile(dist, beta)
        conjugate = legendre_conjugate(M, integral)
        target = beta / ell
        residual = abs(conjugate - target)
        rows.append(MStarRow(beta, integral, conjugate, target, residual, residual / target))
    report = MStarReport(dist.name, ell, rows)
    logger.info(f"M* identity for {dist.name}, ell={ell:g}: max relative residual {report.max_relative_residual:.3g}")
    return report


def orderstat_orlicz_predictor(dist: EmpiricalDistribution, N: int, ell: float) -> float:
    """
    (1/ell) ||(1, ..., 1)||_{M_ell} = 1 / (ell M_ell^{-1}(1/N)).

    Comparable to (1/ell) E sum_{k<=ell} kmax |X_i| up to absolute constants.
    """
    M = OrliczFunction.from_distribution(dist, ell)
    return 1.0 / (ell * orlicz_inverse(M, 1.0 / N))
