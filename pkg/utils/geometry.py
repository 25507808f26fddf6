# Support-function and mean-width estimators for the random bodies K_{N,ell,q}
# Also centroid-body, floating-body and reference-body estimators used by verification runs

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from config.defaults import MIN_TAIL_COUNT, ROLE_AUXILIARY, ROLE_DIRECTIONS, ROLE_SAMPLES
from utils.core import (
    ArrayLike,
    Direction,
    EstimateReport,
    ModelSpec,
    Params,
    SampleSet,
    orderstat_power_mean,
    support_power_means,
    validate_params,
)
from utils.errors import (
    DeltaOutOfRange,
    DimensionMismatch,
    DivisionByZero,
    InsufficientSamples,
    InvalidModel,
    OutOfRange,
)
from utils.samplers import RngStream, sample_set, sample_unit_directions

logger = logging.getLogger(__name__)

_DIRECTION_CHUNK = 256


@dataclass(frozen=True)
class MeanWidthConfig:
    """Monte Carlo budget for mean-width estimates."""
    n_directions: int = 64
    n_replicates: int = 200
    antithetic: bool = False

    def __post_init__(self) -> None:
        if self.n_directions < 1 or self.n_replicates < 1:
            raise OutOfRange(
                f"Monte Carlo counts must be positive, got directions={self.n_directions}, "
                f"replicates={self.n_replicates}"
            )


@dataclass(frozen=True)
class RatioEstimate:
    value: float
    std_error: float
    numerator: EstimateReport
    denominator: EstimateReport


# MARK: Replicate Machinery
def _run_replicates(
    task: Callable[[int], float], n_replicates: int, workers: int = 1, bit_exact: bool = True
) -> np.ndarray:
    """
    Evaluate task(r) for r < n_replicates, possibly on a thread pool.

    In bit-exact mode the values are returned in replicate order, so any
    reduction over them is independent of scheduling. Otherwise they come
    back in completion order.
    """
    if workers <= 1:
        return np.array([task(r) for r in range(n_replicates)], dtype=float)

    values = np.empty(n_replicates, dtype=float)
    completed: List[int] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(task, r): r for r in range(n_replicates)}
        for future in as_completed(futures):
            index = futures[future]
            values[index] = future.result()
            completed.append(index)

    if bit_exact:
        return values
    return values[completed]


def _mean_and_error(values: np.ndarray) -> tuple:
    count = values.shape[0]
    mean = float(np.sum(values) / count)
    if count < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(count))


def _power_mean_report(powers: np.ndarray, q: float) -> tuple:
    """(E Z)^{1/q} with a delta-method standard error, Z = |.|^q draws."""
    moment, moment_error = _mean_and_error(powers)
    if moment <= 0.0:
        return 0.0, 0.0
    value = moment ** (1.0 / q)
    return value, value * moment_error / (q * moment)


def _direction_vector(theta: ArrayLike, n: int) -> np.ndarray:
    coords = theta.coords if isinstance(theta, Direction) else Direction(np.asarray(theta, dtype=float)).coords
    if coords.shape[0] != n:
        raise DimensionMismatch(f"Direction has dimension {coords.shape[0]}, expected {n}")
    return coords


# MARK: Support Function
def support_value(samples: SampleSet, theta: ArrayLike, ell: int, q: float) -> float:
    """
    h_{K_{N,ell,q}}(theta) for one realization.

    Parameters
    ----------
    samples : SampleSet
        The vectors X_1, ..., X_N
    theta : Direction or array-like
        Unit vector of the same dimension as the samples
    ell : int
        Order-statistic depth
    q : float
        Moment exponent

    Returns
    -------
    float
        ((1/ell) sum_{k<=ell} kmax |<X_i, theta>|^q)^{1/q}

    Raises
    ------
    DimensionMismatch
        If theta and the samples differ in dimension
    """
    coords = _direction_vector(theta, samples.n)
    return orderstat_power_mean(samples.vectors @ coords, ell, q)


def support_function(samples: SampleSet, x: ArrayLike, ell: int, q: float) -> float:
    """Positively homogeneous extension of support_value to any x in R^n."""
    x = np.asarray(x, dtype=float)
    return orderstat_power_mean(samples.marginals(x), ell, q)


def comparison_ratio(
    samples_a: SampleSet, samples_b: SampleSet, theta: ArrayLike, params_a: Params, params_b: Params
) -> float:
    """
    support_value of realization A over that of realization B at theta.

    Raises
    ------
    DimensionMismatch
        If the sample sets do not match their params or each other
    InvalidModel
        If the sample sets come from different laws
    DivisionByZero
        If the denominator support value is 0
    """
    for samples, params in ((samples_a, params_a), (samples_b, params_b)):
        if (samples.N, samples.n) != (params.N, params.n):
            raise DimensionMismatch(
                f"Samples of shape {(samples.N, samples.n)} do not match params (N={params.N}, n={params.n})"
            )
    if samples_a.n != samples_b.n:
        raise DimensionMismatch(f"Dimensions differ: {samples_a.n} vs {samples_b.n}")
    if (samples_a.model.variant, samples_a.model.p) != (samples_b.model.variant, samples_b.model.p):
        raise InvalidModel(f"Models differ: {samples_a.model.label} vs {samples_b.model.label}")

    numerator = support_value(samples_a, theta, params_a.ell, params_a.q)
    denominator = support_value(samples_b, theta, params_b.ell, params_b.q)
    if denominator == 0.0:
        raise DivisionByZero("Denominator support value is zero")
    return numerator / denominator


# MARK: Mean Width and Expected Support
def mean_width_estimate(
    model: ModelSpec,
    params: Params,
    cfg: MeanWidthConfig,
    seed: int,
    workers: int = 1,
    bit_exact: bool = True,
    grid_index: int = 0,
) -> EstimateReport:
    """
    Monte Carlo estimate of E w(K_{N,ell,q}).

    Every replicate draws a fresh SampleSet and cfg.n_directions fresh
    directions; the replicate value is the average support value over those
    directions. The standard error comes from the replicate-level variance.
    """

    def replicate(r: int) -> float:
        samples = sample_set(model, params, RngStream(seed, r, ROLE_SAMPLES, grid_index))
        directions = sample_unit_directions(
            params.n, cfg.n_directions, RngStream(seed, r, ROLE_DIRECTIONS, grid_index), cfg.antithetic
        )
        heights = support_power_means(samples.vectors @ directions.T, params.ell, params.q)
        return float(np.sum(heights) / cfg.n_directions)

    values = _run_replicates(replicate, cfg.n_replicates, workers, bit_exact)
    value, error = _mean_and_error(values)
    return EstimateReport(value, error, cfg.n_replicates, cfg.n_directions, params, model, seed)


def support_expectation_estimate(
    model: ModelSpec,
    params: Params,
    theta: ArrayLike,
    n_replicates: int,
    seed: int,
    workers: int = 1,
    bit_exact: bool = True,
    grid_index: int = 0,
) -> EstimateReport:
    """Monte Carlo estimate of E h_{K_{N,ell,q}}(theta) at a fixed direction."""
    if n_replicates < 1:
        raise OutOfRange(f"n_replicates must be >= 1, got {n_replicates}")
    coords = _direction_vector(theta, params.n)

    def replicate(r: int) -> float:
        samples = sample_set(model, params, RngStream(seed, r, ROLE_SAMPLES, grid_index))
        return orderstat_power_mean(samples.vectors @ coords, params.ell, params.q)

    values = _run_replicates(replicate, n_replicates, workers, bit_exact)
    value, error = _mean_and_error(values)
    return EstimateReport(value, error, n_replicates, 0, params, model, seed)


def expected_comparison_ratio(
    model: ModelSpec,
    params_a: Params,
    params_b: Params,
    theta: ArrayLike,
    n_replicates: int,
    seed: int,
    workers: int = 1,
) -> RatioEstimate:
    """
    Ratio E h_A(theta) / E h_B(theta) from independent replicate sets.

    The two expectations use disjoint streams (grid indices 0 and 1); the
    standard error of the ratio is the first-order delta-method value.
    """
    numerator = support_expectation_estimate(model, params_a, theta, n_replicates, seed, workers, grid_index=0)
    denominator = support_expectation_estimate(model, params_b, theta, n_replicates, seed, workers, grid_index=1)
    if denominator.value == 0.0:
        raise DivisionByZero("Denominator expectation is zero")
    ratio = numerator.value / denominator.value
    relative = math.hypot(
        numerator.std_error / numerator.value if numerator.value else 0.0,
        denominator.std_error / denominator.value,
    )
    return RatioEstimate(ratio, abs(ratio) * relative, numerator, denominator)


# MARK: Centroid and Floating Bodies
def _marginal_draws(model: ModelSpec, n: int, theta: ArrayLike, n_samples: int, seed: int, q: float = 1.0) -> np.ndarray:
    params = validate_params(n, n_samples, 1, q)
    coords = _direction_vector(theta, n)
    samples = sample_set(model, params, RngStream(seed, 0, ROLE_SAMPLES))
    return np.abs(samples.vectors @ coords)


def centroid_support_estimate(
    model: ModelSpec, n: int, q: float, theta: ArrayLike, n_samples: int, seed: int
) -> EstimateReport:
    """
    Monte Carlo estimate of h_{Z_q}(theta) = (E|<X, theta>|^q)^{1/q}.

    The standard error is propagated from the q-th moment by the delta method.
    """
    params = validate_params(n, n_samples, n_samples, q)
    marginals = _marginal_draws(model, n, theta, n_samples, seed, q)
    value, error = _power_mean_report(marginals ** q, q)
    return EstimateReport(value, error, n_samples, 0, params, model, seed)


def floating_support_estimate(
    model: ModelSpec, n: int, delta: float, theta: ArrayLike, n_samples: int, seed: int
) -> EstimateReport:
    """
    Empirical (1 - delta)-quantile of |<X, theta>|, the floating-body support level.

    Uses the linear-interpolation quantile. The standard error is half the
    width of the order-statistic interval n(1 - delta) +/- sqrt(n delta (1 - delta)).

    Raises
    ------
    DeltaOutOfRange
        Unless 0 < delta < 1/e
    InsufficientSamples
        If n_samples * delta < 50
    """
    if not 0.0 < delta < math.exp(-1.0):
        raise DeltaOutOfRange(f"delta must lie in (0, 1/e), got {delta}")
    if n_samples * delta < MIN_TAIL_COUNT:
        raise InsufficientSamples(
            f"n_samples * delta = {n_samples * delta:.3g} is below {MIN_TAIL_COUNT}"
        )

    marginals = _marginal_draws(model, n, theta, n_samples, seed)
    level = 1.0 - delta
    value = float(np.quantile(marginals, level, method="linear"))

    spread = math.sqrt(n_samples * delta * (1.0 - delta)) / n_samples
    low, high = np.quantile(marginals, [max(level - spread, 0.0), min(level + spread, 1.0)], method="linear")
    params = validate_params(n, n_samples, 1, math.log(1.0 / delta))
    return EstimateReport(value, float(high - low) / 2.0, n_samples, 0, params, model, seed)


def centroid_width_estimate(
    model: ModelSpec, n: int, q: float, n_directions: int, n_samples: int, seed: int
) -> EstimateReport:
    """
    Mean width of Z_q estimated over random directions.

    One sample of n_samples points is shared by all directions; the standard
    error reflects direction-to-direction variation only.
    """
    params = validate_params(n, n_samples, n_samples, q)
    samples = sample_set(model, params, RngStream(seed, 0, ROLE_SAMPLES))
    directions = sample_unit_directions(n, n_directions, RngStream(seed, 0, ROLE_DIRECTIONS))
    powers = np.abs(samples.vectors @ directions.T) ** q
    heights = np.mean(powers, axis=0) ** (1.0 / q)
    value, error = _mean_and_error(heights)
    return EstimateReport(value, error, 1, n_directions, params, model, seed)


# MARK: Auxiliary Expectations
def max_moment_estimate(
    model: ModelSpec, n: int, m: int, q: float, theta: ArrayLike, n_replicates: int, seed: int
) -> EstimateReport:
    """(E max_{i<=m} |<X_i, theta>|^q)^{1/q} by Monte Carlo over n_replicates groups of m points."""
    params = validate_params(n, m, 1, q)
    coords = _direction_vector(theta, n)

    def replicate(r: int) -> float:
        samples = sample_set(model, params, RngStream(seed, r, ROLE_AUXILIARY))
        return float(np.max(np.abs(samples.vectors @ coords)) ** q)

    value, error = _power_mean_report(_run_replicates(replicate, n_replicates), q)
    return EstimateReport(value, error, n_replicates, 0, params, model, seed)


def gaussian_orderstat_moment_estimate(N: int, ell: int, q: float, n_replicates: int, seed: int) -> EstimateReport:
    """((1/ell) E sum_{k<=ell} kmax |g_i|^q)^{1/q} for N i.i.d. standard normals."""
    params = validate_params(1, N, ell, q)
    model = ModelSpec.gaussian()

    def replicate(r: int) -> float:
        g = RngStream(seed, r, ROLE_AUXILIARY).generator().standard_normal(N)
        return orderstat_power_mean(g, ell, q) ** q

    value, error = _power_mean_report(_run_replicates(replicate, n_replicates), q)
    return EstimateReport(value, error, n_replicates, 0, params, model, seed)


def reference_body_width_estimate(N: int, ell: int, q: float, n_directions: int, seed: int) -> EstimateReport:
    """
    Mean width of the deterministic body K_{ell,q} in R^N.

    Its support function at theta in S^{N-1} is orderstat_power_mean(theta, ell, q).
    """
    params = validate_params(N, N, ell, q)
    gen = RngStream(seed, 0, ROLE_DIRECTIONS).generator()
    heights = []
    for start in range(0, n_directions, _DIRECTION_CHUNK):
        count = min(_DIRECTION_CHUNK, n_directions - start)
        directions = sample_unit_directions(N, count, gen)
        heights.append(support_power_means(directions.T, ell, q))
    value, error = _mean_and_error(np.concatenate(heights))
    return EstimateReport(value, error, 1, n_directions, params, ModelSpec.gaussian(), seed)


def max_norm_estimate(model: ModelSpec, n: int, N: int, n_replicates: int, seed: int) -> EstimateReport:
    """E max_{i<=N} ||X_i||_2 by Monte Carlo."""
    params = validate_params(n, N, 1, 1)

    def replicate(r: int) -> float:
        samples = sample_set(model, params, RngStream(seed, r, ROLE_AUXILIARY))
        return float(np.max(np.linalg.norm(samples.vectors, axis=1)))

    value, error = _mean_and_error(_run_replicates(replicate, n_replicates))
    return EstimateReport(value, error, n_replicates, 0, params, model, seed)


# MARK: Estimator
class Estimator:
    """
    Estimator utility bound to a worker pool size and reduction mode.

    Runners hold one instance so every estimate they request is logged under
    their instance id.
    """

    def __init__(self, instance_id: Optional[int] = None, workers: int = 1, bit_exact: bool = True):
        """
        Initialize the Estimator utility.

        Parameters
        ----------
        instance_id : int, optional
            Instance ID for logging purposes
        workers : int
            Thread pool size for replicate dispatch
        bit_exact : bool
            Reduce replicate values in index order
        """
        if instance_id:
            logger_name = f"utils.geometry.instance_{instance_id}"
        else:
            logger_name = "utils.geometry"
        self.logger = logging.getLogger(logger_name)
        self.workers = max(1, int(workers))
        self.bit_exact = bit_exact
        self.logger.info(f"Initialized Estimator utility (workers={self.workers}, bit_exact={bit_exact})")

    def mean_width(
        self, model: ModelSpec, params: Params, cfg: MeanWidthConfig, seed: int, grid_index: int = 0
    ) -> EstimateReport:
        try:
            report = mean_width_estimate(
                model, params, cfg, seed, workers=self.workers, bit_exact=self.bit_exact, grid_index=grid_index
            )
            self.logger.info(
                f"Mean width {model.label} n={params.n} N={params.N} ell={params.ell} q={params.q:g}: "
                f"{report.value:.6g} +/- {report.std_error:.3g}"
            )
            return report

        except Exception as e:
            self.logger.error(f"Mean width estimate failed: {e}")
            raise

    def support_expectation(
        self, model: ModelSpec, params: Params, theta: ArrayLike, n_replicates: int, seed: int, grid_index: int = 0
    ) -> EstimateReport:
        try:
            report = support_expectation_estimate(
                model, params, theta, n_replicates, seed,
                workers=self.workers, bit_exact=self.bit_exact, grid_index=grid_index,
            )
            self.logger.info(f"Expected support {model.label} {params}: {report.value:.6g} +/- {report.std_error:.3g}")
            return report

        except Exception as e:
            self.logger.error(f"Support expectation estimate failed: {e}")
            raise

    def comparison(
        self, model: ModelSpec, params_a: Params, params_b: Params, theta: ArrayLike, n_replicates: int, seed: int
    ) -> RatioEstimate:
        try:
            ratio = expected_comparison_ratio(model, params_a, params_b, theta, n_replicates, seed, self.workers)
            self.logger.info(f"Comparison ratio {params_a} / {params_b}: {ratio.value:.4g}")
            return ratio

        except Exception as e:
            self.logger.error(f"Comparison ratio failed: {e}")
            raise
