# Closed-form predictors and exact constants for random convex body widths
# All logarithms are natural; predictors carry implied constant 1

import logging
import math
import numbers
from dataclasses import dataclass
from typing import Any

from scipy.special import gammaln

from utils.errors import (
    EllOutOfRange,
    InvalidModel,
    NonFiniteQ,
    NonPositiveDimension,
    NonPositiveSampleCount,
    OutOfRange,
    QBelowOne,
    QOutOfRegime,
    TBelowOne,
)

logger = logging.getLogger(__name__)

REGIME_SMALL_Q = "small-q"
REGIME_MID_Q = "mid-q"
REGIME_LARGE_Q = "large-q"
BOUND_SUFFIX = " (bound)"


@dataclass(frozen=True)
class PredictorValue:
    """Predicted value with the case of the formula that produced it."""
    value: float
    regime: str


def _check_real(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise OutOfRange(f"{name} must be a real number, got {value!r}")
    return float(value)


def _check_args(n: Any, N: Any, ell: Any, q: Any) -> None:
    # N and ell may be real here so that closed forms can be evaluated at N = e^k
    if _check_real(n, "n") < 1:
        raise NonPositiveDimension(f"n must be >= 1, got {n}")
    if _check_real(N, "N") < 1:
        raise NonPositiveSampleCount(f"N must be >= 1, got {N}")
    if not 1 <= _check_real(ell, "ell") <= N:
        raise EllOutOfRange(f"ell must satisfy 1 <= ell <= N={N}, got {ell}")
    q_val = _check_real(q, "q")
    if not math.isfinite(q_val):
        raise NonFiniteQ(f"q must be finite, got {q}")
    if q_val < 1:
        raise QBelowOne(f"q must be >= 1, got {q}")


def _check_exponent(p: float) -> None:
    if math.isnan(p) or p < 1:
        raise InvalidModel(f"Exponent p must be >= 1, got {p}")


def conjugate_exponent(p: float) -> float:
    """Hölder conjugate p* with 1/p + 1/p* = 1; p = 1 maps to infinity."""
    _check_exponent(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# MARK: Mean Width Predictors
def regime_label(N: float, ell: float, q: float) -> str:
    """small-q for q <= log(N/ell), mid-q up to log N, large-q beyond."""
    if q <= math.log(N / ell):
        return REGIME_SMALL_Q
    if q <= math.log(N):
        return REGIME_MID_Q
    return REGIME_LARGE_Q


def predictor_logconcave(n: float, N: float, ell: float, q: float) -> PredictorValue:
    """
    Expected mean width of K_{N,ell,q} for isotropic log-concave laws.

    Returns
    -------
    PredictorValue
        min{max{sqrt(q), sqrt(log(N/ell))}, sqrt(log N)} and its regime
    """
    _check_args(n, N, ell, q)
    value = min(max(math.sqrt(q), math.sqrt(math.log(N / ell))), math.sqrt(math.log(N)))
    return PredictorValue(value=value, regime=regime_label(N, ell, q))


def predictor_lp(n: float, N: float, ell: float, q: float, p: float) -> PredictorValue:
    """n^{-1/p} times predictor_logconcave, for cone measure and uniform l_p balls."""
    _check_exponent(p)
    base = predictor_logconcave(n, N, ell, q)
    return PredictorValue(value=n ** (-1.0 / p) * base.value, regime=base.regime)


def predictor_gaussian_orderstats(N: float, ell: float, q: float) -> float:
    """
    Order of ((1/ell) E sum_{k<=ell} kmax |g_i|^q)^{1/q} for standard normals.

    Raises
    ------
    QOutOfRegime
        If q > log N
    """
    _check_args(1, N, ell, q)
    if q > math.log(N):
        raise QOutOfRegime(f"q={q} exceeds log N={math.log(N):.6g}")
    log_ratio = math.log(N / ell)
    if q <= log_ratio:
        return math.sqrt(log_ratio)
    return math.sqrt(q)


def many_points_upper(n: float, N: float, ell: float, q: float) -> PredictorValue:
    """
    Upper bound on the expected mean width when e^{sqrt n} <= N <= e^n.

    Outside that range the formula is still returned and a warning logged.
    The regime label carries a bound marker since only the upper estimate holds.
    """
    _check_args(n, N, ell, q)
    log_N = math.log(N)
    if not math.sqrt(n) <= log_N <= n:
        logger.warning(f"many_points_upper outside e^sqrt(n) <= N <= e^n (n={n}, N={N})")

    log_ratio = math.log(N / ell)
    factor = log_N / math.sqrt(n)
    if q >= log_N:
        return PredictorValue(math.sqrt(log_N) * math.log(log_N) ** 2, REGIME_LARGE_Q + BOUND_SUFFIX)
    if q <= log_ratio:
        return PredictorValue(factor * math.sqrt(log_ratio), REGIME_SMALL_Q + BOUND_SUFFIX)
    return PredictorValue(factor * math.sqrt(q), REGIME_MID_Q + BOUND_SUFFIX)


def many_points_lower(n: float, N: float, ell: float, q: float) -> PredictorValue:
    """
    Lower bound max{w(Z_{log(1+N/ell)}), w(Z_q)} with w(Z_r) replaced by sqrt(r).

    Beyond q = log N the q-branch is capped at sqrt(log N).
    """
    _check_args(n, N, ell, q)
    r = max(math.log1p(N / ell), min(q, math.log(N)))
    return PredictorValue(math.sqrt(r), regime_label(N, ell, q) + BOUND_SUFFIX)


def centroid_width_predictor(q: float, n: float) -> float:
    """sqrt(q), the mean width of Z_q for isotropic log-concave laws when 1 <= q <= sqrt(n)."""
    if q < 1:
        raise QBelowOne(f"q must be >= 1, got {q}")
    if q > math.sqrt(n):
        logger.warning(f"centroid_width_predictor used with q={q} > sqrt(n)={math.sqrt(n):.4g}")
    return math.sqrt(q)


# MARK: Constants
def c_n_constant(n: int) -> float:
    """
    n Gamma(1 + (n-1)/2) / (sqrt(2) Gamma(1 + n/2)), equal to E||G||_2 in R^n.

    Evaluated through log-Gamma so large n does not overflow.
    """
    if n < 1:
        raise NonPositiveDimension(f"n must be >= 1, got {n}")
    return n * math.exp(gammaln(1 + (n - 1) / 2) - gammaln(1 + n / 2)) / math.sqrt(2)


def log_volume_bpn(n: int, p: float) -> float:
    """log |B_p^n| = n log(2 Gamma(1 + 1/p)) - log Gamma(1 + n/p)."""
    if n < 1:
        raise NonPositiveDimension(f"n must be >= 1, got {n}")
    _check_exponent(p)
    return float(n * (math.log(2.0) + gammaln(1 + 1 / p)) - gammaln(1 + n / p))


def volume_bpn(n: int, p: float) -> float:
    """Volume of the unit l_p ball in R^n."""
    return math.exp(log_volume_bpn(n, p))


def gaussian_pnorm_branch(n: float, p: float) -> str:
    """Which case of gaussian_pnorm_expectation applies: 'power' or 'logarithmic'."""
    return "power" if p <= math.log(n) else "logarithmic"


def gaussian_pnorm_expectation(n: float, p: float) -> float:
    """
    Asymptotic order of E||G||_p for a standard Gaussian G in R^n.

    n^{1/p} sqrt(p) for p <= log n, sqrt(log n) otherwise; p may be infinite.
    """
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    _check_exponent(p)
    if gaussian_pnorm_branch(n, p) == "power":
        return n ** (1.0 / p) * math.sqrt(p)
    return math.sqrt(math.log(n))


def mean_width_bpn(n: float, p: float) -> float:
    """
    Asymptotic order of the mean width of B_p^n.

    Case split on the conjugate exponent p*: n^{1/p* - 1/2} sqrt(p*) when
    p* <= log n, otherwise n^{-1/2} sqrt(log n). Consistent with
    E||G||_{p*} = w(B_p^n) E||G||_2 and E||G||_2 ~ sqrt(n).
    """
    if n < 2:
        raise OutOfRange(f"n must be >= 2, got {n}")
    p_star = conjugate_exponent(p)
    if p_star <= math.log(n):
        return n ** (1.0 / p_star - 0.5) * math.sqrt(p_star)
    return math.sqrt(math.log(n) / n)


# MARK: Tail Bounds
def paouris_tail(t: float, n: float) -> float:
    """
    e^{-t sqrt(n)}, the probability bound for ||X||_2 >= c t sqrt(n).

    Raises
    ------
    TBelowOne
        If t < 1
    """
    if t < 1:
        raise TBelowOne(f"t must be >= 1, got {t}")
    return math.exp(-t * math.sqrt(n))


def paouris_threshold(t: float, n: float, c: float = 1.0) -> float:
    """The norm level c t sqrt(n) at which paouris_tail applies; c is caller-supplied."""
    if t < 1:
        raise TBelowOne(f"t must be >= 1, got {t}")
    return c * t * math.sqrt(n)


def paouris_max_norm_bound(n: float, N: float, c: float = 1.0) -> float:
    """(c + 1) max{sqrt(n), log N}, bounding E max_{i<=N} ||X_i||_2."""
    if N < 1:
        raise NonPositiveSampleCount(f"N must be >= 1, got {N}")
    return (c + 1.0) * max(math.sqrt(n), math.log(N))


def cone_deviation_bound(n: float, p: float, r: float, t: float, c: float = 1.0) -> float:
    """
    exp(-t^p n^{p/r} / c), bounding the cone measure of ||x||_r >= t / n^{1/p - 1/r}.

    Valid for 1 <= p <= r and t beyond a threshold depending on (p, r).
    """
    _check_exponent(p)
    if r < p:
        raise OutOfRange(f"r must be >= p, got r={r}, p={p}")
    return math.exp(-(t ** p) * n ** (p / r) / c)


def cone_deviation_level(n: float, p: float, r: float, t: float) -> float:
    """The l_r norm level t / n^{1/p - 1/r} of cone_deviation_bound."""
    return t / n ** (1.0 / p - 1.0 / r)
