# Verification suites for samplers, support functions, Orlicz machinery and predictors
# Inherits from Base class for logging infrastructure
# Each suite is a list of checks producing CheckResult rows; failures set a nonzero exit status

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.special import gammaln

from config.defaults import (
    DEFAULT_MASTER_SEED,
    MAX_EXPONENT_SPREAD,
    MAX_GAUSSIAN_SPREAD,
    PATHWISE_RTOL,
    RATIO_BOUNDS,
    ROLE_AUXILIARY,
    ROLE_DIRECTIONS,
    ROLE_SAMPLES,
    UNIT_NORM_TOL,
    VERIFICATION_SUITES,
)
from scripts.base import Base
from scripts.sweep import SweepConfig, estimate_grid, expand_grid, summarize_ratios
from utils.core import Direction, ModelSpec, validate_params
from utils.errors import ConfigInvalid, KBodyError, UnknownSuite
from utils.file import version_string
from utils.geometry import (
    MeanWidthConfig,
    centroid_support_estimate,
    centroid_width_estimate,
    floating_support_estimate,
    gaussian_orderstat_moment_estimate,
    max_moment_estimate,
    max_norm_estimate,
    reference_body_width_estimate,
    support_function,
    support_value,
)
from utils.orlicz import (
    EmpiricalDistribution,
    OrliczFunction,
    conjugate_biconjugate_residual,
    gaussian_breakpoint,
    gaussian_q_orlicz,
    gaussian_q_orlicz_inverse,
    luxemburg_norm,
    m_ell_from_distribution,
    orderstat_orlicz_predictor,
    orlicz_inverse,
    verify_mstar_identity,
)
from utils.predictors import (
    c_n_constant,
    centroid_width_predictor,
    cone_deviation_bound,
    cone_deviation_level,
    conjugate_exponent,
    gaussian_pnorm_expectation,
    mean_width_bpn,
    paouris_max_norm_bound,
    paouris_tail,
    paouris_threshold,
    volume_bpn,
)
from utils.samplers import (
    RngStream,
    isotropic_ball_factor,
    sample_cone_lp,
    sample_p_generalized_scalar,
    sample_set,
    sample_uniform_ball_lp,
    sample_unit_directions,
)

SAMPLER_EXPONENTS = (1.0, 1.5, 2.0, 4.0)
PATHWISE_Q = (1.0, 2.0, 4.0, 8.0)
PATHWISE_EXPONENTS = (1.0, 1.5, 2.0, 4.0)
PATHWISE_MAX_N = 32
PATHWISE_MAX_N_POINTS = 512

# Constants supplied to the tail bounds, and their levels
PAOURIS_CHECK_CONSTANT = 1.5
TAIL_LEVELS = (1.0, 1.5, 2.0)
CONE_DEVIATION_CONSTANT = 4.0
CONE_DEVIATION_CASES = ((1.0, 2.0, 3.0), (2.0, 4.0, 1.5))

# grid_index values of the verification streams
_PATHWISE_GRID = 100
_AUXILIARY_GRID = 200


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    value: float = float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "detail": self.detail,
            "value": float(self.value) if math.isfinite(self.value) else None,
        }


@dataclass
class VerificationReport:
    """Outcome of one suite; passed only when every check passed."""
    suite: str
    checks: List[CheckResult] = field(default_factory=list)
    budget: float = 1.0
    seed: int = DEFAULT_MASTER_SEED

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "budget": self.budget,
            "seed": self.seed,
            "version": version_string(),
            "checks": [check.to_dict() for check in self.checks],
        }


def _bounds_check(name: str, ratios: Sequence[float], bounds: Tuple[float, float] = RATIO_BOUNDS) -> CheckResult:
    """All ratios inside [low, high]; value is the ratio farthest from 1 on a log scale."""
    values = np.asarray(list(ratios), dtype=float)
    if values.size == 0 or not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        return CheckResult(name, False, f"non-positive or non-finite ratios among {values.size}")
    low, high = bounds
    extreme = float(values[np.argmax(np.abs(np.log(values)))])
    passed = bool(np.all((values >= low) & (values <= high)))
    detail = f"min={values.min():.4g}, max={values.max():.4g} over {values.size} cells, bounds [{low:g}, {high:g}]"
    return CheckResult(name, passed, detail, extreme)


def _z_check(name: str, estimate: float, target: float, std_error: float, limit: float) -> CheckResult:
    z = abs(estimate - target) / std_error if std_error > 0.0 else (0.0 if estimate == target else math.inf)
    return CheckResult(name, z <= limit, f"estimate {estimate:.6g} vs {target:.6g}, |z|={z:.3g} (limit {limit:g})", z)


class VerificationRunner(Base):
    """
    Runs a named verification suite and reports per-check diagnostics.

    Inherits from Base class to get logging infrastructure and utility access.
    Monte Carlo sizes scale with the budget multiplier; exact pathwise checks
    scale only in the number of random instances.
    """

    def __init__(self, file_path: str, workers: Optional[int] = None, bit_exact: Optional[bool] = None):
        """
        Initialize the verification runner.

        Parameters
        ----------
        file_path : str
            Path to log file relative to logs/ directory
        workers : int, optional
            Thread pool size for replicate dispatch
        bit_exact : bool, optional
            Deterministic reduction order
        """
        super().__init__(file_path=file_path, workers=workers, bit_exact=bit_exact)
        logger_name = f"scripts.verification.instance_{self.instance_id}"
        self.logger = logging.getLogger(logger_name)

        self.suites: Dict[str, List[Callable[[], List[CheckResult]]]] = {
            "pathwise": [self.check_pathwise],
            "samplers": [
                self.check_cone_unit_norm,
                self.check_generalized_moments,
                self.check_cone_gaussian_law,
                self.check_cone_independence,
                self.check_ball_radius,
                self.check_isotropic_normalization,
                self.check_directions,
            ],
            "orlicz": [
                self.check_mstar_identity,
                self.check_orlicz_scaling,
                self.check_gaussian_breakpoint,
                self.check_norm_of_ones,
                self.check_biconjugate,
                self.check_orderstat_bridge,
            ],
            "ratios": [
                self.check_rotational_invariance,
                self.check_gaussian_ratios,
                self.check_cone_ratios,
                self.check_isotropic_ball_ratios,
                self.check_comparison,
                self.check_general_q_comparison,
                self.check_centroid_floating_bridge,
            ],
            "formulas": [
                self.check_volume_hit_rate,
                self.check_volume_closed_form,
                self.check_c_n_asymptotics,
                self.check_gaussian_pnorm,
                self.check_mean_width_consistency,
                self.check_gaussian_factorization,
                self.check_max_norm_bound,
                self.check_paouris_tail,
                self.check_cone_deviation,
                self.check_centroid_width,
            ],
        }
        self.checks: List[Callable[[], List[CheckResult]]] = []
        self.report: Optional[VerificationReport] = None

        # ETL parameters (set before calling extract/load)
        self._suite: Optional[str] = None
        self._budget: float = 1.0
        self._seed: int = DEFAULT_MASTER_SEED
        self._output_path: Optional[str] = None

        self.logger.info("Initialized VerificationRunner class")

    # MARK: Helpers
    def _scaled(self, base: int, floor: int) -> int:
        return max(floor, int(round(base * self._budget)))

    def _generator(self, key: int) -> np.random.Generator:
        return RngStream(self._seed, key, ROLE_AUXILIARY, _AUXILIARY_GRID).generator()

    def _mc_config(self) -> MeanWidthConfig:
        return MeanWidthConfig(n_directions=self._scaled(64, 8), n_replicates=self._scaled(200, 20))

    def _sweep_ratios(self, model: ModelSpec, n_grid: list, N_grid: list, ell_grid: list, q_grid: list):
        cfg = SweepConfig(
            model=model, n_grid=n_grid, N_grid=N_grid, ell_grid=ell_grid, q_grid=q_grid,
            mc=self._mc_config(), master_seed=self._seed,
        )
        return estimate_grid(self.estimator, cfg, expand_grid(cfg))

    # MARK: Pathwise Suite
    def check_pathwise(self) -> List[CheckResult]:
        """
        Exact inequalities on random instances of mixed models.

        Monotone in q and ell, the e^{-1} sandwich when q >= log ell, the
        ell = N identity, positive homogeneity and subadditivity. Comparisons
        allow a few ulps of rounding.
        """
        instances = self._scaled(1000, 50)
        violations = {"monotone_in_q": 0, "monotone_in_ell": 0, "sandwich": 0, "ell_equals_N": 0,
                      "homogeneity": 0, "subadditivity": 0}
        worst = dict.fromkeys(violations, 0.0)

        def record(name: str, excess: float) -> None:
            if excess > 0.0:
                violations[name] += 1
                worst[name] = max(worst[name], excess)

        for i in range(instances):
            gen = RngStream(self._seed, i, ROLE_AUXILIARY, _PATHWISE_GRID).generator()
            variant = int(gen.integers(4))
            p = float(PATHWISE_EXPONENTS[int(gen.integers(len(PATHWISE_EXPONENTS)))])
            model = [ModelSpec.gaussian(), ModelSpec.cone_lp(p), ModelSpec.uniform_ball_lp(p),
                     ModelSpec.isotropic_ball_lp(p)][variant]
            n = int(gen.integers(1, PATHWISE_MAX_N + 1))
            N = int(gen.integers(1, PATHWISE_MAX_N_POINTS + 1))
            params = validate_params(n, N, 1, 1)

            samples = sample_set(model, params, RngStream(self._seed, i, ROLE_SAMPLES, _PATHWISE_GRID))
            theta = sample_unit_directions(n, 1, RngStream(self._seed, i, ROLE_DIRECTIONS, _PATHWISE_GRID))[0]
            marginals = samples.vectors @ theta

            ells = sorted({2 ** k for k in range(int(math.log2(N)) + 1)} | {N})
            table = np.array([[support_value(samples, theta, ell, q) for q in PATHWISE_Q] for ell in ells])
            h11 = float(table[0, 0])

            # rows: ell ascending, columns: q ascending
            record("monotone_in_q", float(np.max(table[:, :-1] - table[:, 1:] * (1.0 + PATHWISE_RTOL), initial=0.0)))
            record("monotone_in_ell", float(np.max(table[1:, :] - table[:-1, :] * (1.0 + PATHWISE_RTOL), initial=0.0)))

            for row, ell in enumerate(ells):
                for col, q in enumerate(PATHWISE_Q):
                    if q >= math.log(ell):
                        h = table[row, col]
                        record("sandwich", max(h - h11 * (1.0 + PATHWISE_RTOL),
                                               math.exp(-1.0) * h11 * (1.0 - PATHWISE_RTOL) - h))

            for col, q in enumerate(PATHWISE_Q):
                direct = N ** (-1.0 / q) * float(np.linalg.norm(marginals, ord=q))
                h = table[-1, col]
                record("ell_equals_N", abs(h - direct) - 1e-12 * max(direct, 1e-300))

            ell = ells[int(gen.integers(len(ells)))]
            q = PATHWISE_Q[int(gen.integers(len(PATHWISE_Q)))]
            x = gen.standard_normal(n)
            y = gen.standard_normal(n)
            c = float(gen.uniform(0.1, 10.0))
            hx = support_function(samples, x, ell, q)
            hy = support_function(samples, y, ell, q)
            hcx = support_function(samples, c * x, ell, q)
            record("homogeneity", abs(hcx - c * hx) - 1e-12 * max(c * hx, 1e-300))
            record("subadditivity", support_function(samples, x + y, ell, q) - (hx + hy) * (1.0 + 1e-12))

        return [
            CheckResult(name, violations[name] == 0, f"{violations[name]} violations over {instances} instances",
                        worst[name])
            for name in violations
        ]

    # MARK: Samplers Suite
    def check_cone_unit_norm(self) -> List[CheckResult]:
        draws = self._scaled(10_000, 1_000)
        gen = self._generator(1)
        worst = 0.0
        for p in SAMPLER_EXPONENTS:
            y, _ = sample_cone_lp(8, p, gen, size=draws)
            norms = np.sum(np.abs(y) ** p, axis=1) ** (1.0 / p)
            worst = max(worst, float(np.max(np.abs(norms - 1.0))))
        return [CheckResult("cone_unit_norm", worst <= UNIT_NORM_TOL,
                            f"max |(||Y||_p - 1)| over p in {SAMPLER_EXPONENTS}, {draws} draws each", worst)]

    def check_generalized_moments(self) -> List[CheckResult]:
        """E|t| and E|t|^2 against Gamma((k+1)/p)/Gamma(1/p) within 4 standard errors."""
        draws = self._scaled(1_000_000, 100_000)
        gen = self._generator(2)
        results = []
        for p in SAMPLER_EXPONENTS:
            t = np.abs(sample_p_generalized_scalar(p, gen, size=draws))
            for k in (1, 2):
                values = t ** k
                target = math.exp(gammaln((k + 1) / p) - gammaln(1 / p))
                std_error = float(np.std(values, ddof=1) / math.sqrt(draws))
                results.append(_z_check(f"generalized_moment_p{p:g}_k{k}", float(np.mean(values)), target,
                                        std_error, 4.0))
        return results

    def check_cone_gaussian_law(self) -> List[CheckResult]:
        """For p = 2 the cone measure is the normalized Gaussian; two-sample K-S on the first coordinate."""
        draws = self._scaled(100_000, 20_000)
        gen = self._generator(3)
        y, _ = sample_cone_lp(8, 2.0, gen, size=draws)
        g = gen.standard_normal((draws, 8))
        reference = g[:, 0] / np.linalg.norm(g, axis=1)
        result = stats.ks_2samp(y[:, 0], reference)
        pvalue = float(result.pvalue)
        return [CheckResult("cone_p2_gaussian_law", pvalue > 0.01, f"K-S p-value {pvalue:.4g} at {draws} draws", pvalue)]

    def check_cone_independence(self) -> List[CheckResult]:
        """|corr(|Y_1|, ||G||_p)| < 0.02: the direction and the radius are independent."""
        draws = self._scaled(100_000, 50_000)
        gen = self._generator(4)
        worst = 0.0
        for p in SAMPLER_EXPONENTS:
            y, norms = sample_cone_lp(8, p, gen, size=draws)
            worst = max(worst, abs(float(np.corrcoef(np.abs(y[:, 0]), norms)[0, 1])))
        return [CheckResult("cone_radius_independence", worst < 0.02,
                            f"max |corr| over p in {SAMPLER_EXPONENTS}, {draws} draws", worst)]

    def check_ball_radius(self) -> List[CheckResult]:
        """||X||_p^n is uniform on [0, 1] for X uniform in B_p^n."""
        draws = self._scaled(20_000, 5_000)
        gen = self._generator(5)
        results = []
        n = 5
        for p in (1.0, 2.0):
            x = sample_uniform_ball_lp(n, p, gen, size=draws)
            radii = np.sum(np.abs(x) ** p, axis=1) ** (1.0 / p)
            pvalue = float(stats.kstest(radii ** n, "uniform").pvalue)
            results.append(CheckResult(f"ball_radius_law_p{p:g}", pvalue > 0.01, f"K-S p-value {pvalue:.4g}", pvalue))
        return results

    def check_isotropic_normalization(self) -> List[CheckResult]:
        worst = 0.0
        for n in (2, 8, 32):
            for p in SAMPLER_EXPONENTS:
                volume = isotropic_ball_factor(n, p) ** n * volume_bpn(n, p)
                worst = max(worst, abs(volume - 1.0))
        return [CheckResult("isotropic_ball_volume_one", worst <= 1e-12, "|volume - 1| of the dilated ball", worst)]

    def check_directions(self) -> List[CheckResult]:
        gen = self._generator(6)
        count = self._scaled(10_000, 1_000)
        plain = sample_unit_directions(10, count, gen)
        paired = sample_unit_directions(10, count, gen, antithetic=True)
        worst = float(max(np.max(np.abs(np.linalg.norm(plain, axis=1) - 1.0)),
                          np.max(np.abs(np.linalg.norm(paired, axis=1) - 1.0))))
        mirrored = float(np.max(np.abs(np.abs(paired[0::2][: len(paired[1::2])]) - np.abs(paired[1::2]))))
        return [
            CheckResult("directions_unit_norm", worst <= UNIT_NORM_TOL, f"{count} plain and antithetic directions",
                        worst),
            CheckResult("antithetic_pairs", mirrored == 0.0, "pairs agree in absolute coordinates", mirrored),
        ]

    # MARK: Orlicz Suite
    def check_mstar_identity(self) -> List[CheckResult]:
        """Conjugate of M_ell at the integrated quantile equals beta/ell within 2%."""
        betas = list(np.linspace(0.05, 0.9, 8))
        results = []
        for dist in (EmpiricalDistribution.half_normal(), EmpiricalDistribution.constant(1.0)):
            for ell in (1.0, 4.0, 16.0):
                report = verify_mstar_identity(dist, ell, betas)
                residual = report.max_relative_residual
                results.append(CheckResult(f"mstar_identity_{dist.name}_ell{ell:g}", residual <= 0.02,
                                           f"max relative residual over {len(betas)} betas", residual))
        return results

    def check_orlicz_scaling(self) -> List[CheckResult]:
        """ell M_ell(s) = M_1(ell s)."""
        gen = self._generator(7)
        worst = 0.0
        dists = [EmpiricalDistribution.half_normal(),
                 EmpiricalDistribution.from_samples(np.abs(gen.standard_normal(1000)), name="sample")]
        for dist in dists:
            for ell in (2.0, 8.0, 32.0):
                for s in np.geomspace(0.05, 20.0, 12):
                    gap = abs(ell * m_ell_from_distribution(dist, ell, s) - m_ell_from_distribution(dist, 1.0, ell * s))
                    worst = max(worst, gap)
        return [CheckResult("orlicz_scaling", worst <= 1e-6, "max |ell M_ell(s) - M_1(ell s)|", worst)]

    def check_gaussian_breakpoint(self) -> List[CheckResult]:
        value_gap = 0.0
        jump = 0.0
        round_trip = 0.0
        for q in (1.0, 2.0, 4.0, 8.0):
            for ell in (1.0, 4.0, 64.0):
                t_star = gaussian_breakpoint(ell, q)
                expected = math.exp(-(q + 2.0) / 2.0) / ell
                at_star = gaussian_q_orlicz(ell, q, t_star)
                value_gap = max(value_gap, abs(at_star - expected) / expected)
                left = gaussian_q_orlicz(ell, q, t_star * (1.0 - 1e-12))
                jump = max(jump, abs(at_star - left))
                for t in (0.5 * t_star, 2.0 * t_star):
                    inverse = gaussian_q_orlicz_inverse(ell, q, gaussian_q_orlicz(ell, q, t))
                    round_trip = max(round_trip, abs(inverse - t) / t)
        return [
            CheckResult("gaussian_breakpoint_value", value_gap <= 1e-12, "relative gap to e^{-(q+2)/2}/ell", value_gap),
            CheckResult("gaussian_continuity", jump <= 1e-10, "jump across the breakpoint", jump),
            CheckResult("gaussian_inverse", round_trip <= 1e-9, "relative inverse round-trip error", round_trip),
        ]

    def check_norm_of_ones(self) -> List[CheckResult]:
        """||(1, ..., 1)||_M = 1 / M^{-1}(1/N)."""
        worst = 0.0
        for M in (OrliczFunction.power(2.0), OrliczFunction.gaussian(4.0, 2.0)):
            for N in (16, 256):
                norm = luxemburg_norm(M, np.ones(N))
                expected = 1.0 / orlicz_inverse(M, 1.0 / N)
                worst = max(worst, abs(norm - expected) / expected)
        return [CheckResult("luxemburg_norm_of_ones", worst <= 1e-8, "relative gap to 1/M^{-1}(1/N)", worst)]

    def check_biconjugate(self) -> List[CheckResult]:
        residual = conjugate_biconjugate_residual(OrliczFunction.power(2.0), [0.1, 0.5, 1.0, 2.0])
        return [CheckResult("biconjugate", residual <= 1e-6, "max relative |M** - M| for t^2", residual)]

    def check_orderstat_bridge(self) -> List[CheckResult]:
        """Orlicz norm of the ones vector against the Monte Carlo top-ell average of |g|."""
        reps = self._scaled(2_000, 200)
        dist = EmpiricalDistribution.half_normal()
        ratios = []
        for N in (64, 1024):
            for ell in (1, 4, 16):
                predicted = orderstat_orlicz_predictor(dist, N, ell)
                estimate = gaussian_orderstat_moment_estimate(N, ell, 1.0, reps, self._seed)
                ratios.append(estimate.value / predicted)
        return [_bounds_check("orlicz_orderstat_bridge", ratios)]

    # MARK: Ratios Suite
    def check_rotational_invariance(self) -> List[CheckResult]:
        """Gaussian expected support at 5 directions, pairwise within 3 combined standard errors."""
        model = ModelSpec.gaussian()
        params = validate_params(16, 256, 16, 2.0)
        reps = self._scaled(10_000, 200)
        directions = sample_unit_directions(16, 5, self._generator(8))
        reports = [
            self.estimator.support_expectation(model, params, theta, reps, self._seed, grid_index=k)
            for k, theta in enumerate(directions)
        ]
        worst = 0.0
        for a in range(len(reports)):
            for b in range(a + 1, len(reports)):
                combined = math.hypot(reports[a].std_error, reports[b].std_error)
                worst = max(worst, abs(reports[a].value - reports[b].value) / combined)
        return [CheckResult("gaussian_rotational_invariance", worst <= 3.0,
                            f"max pairwise |z| over {len(reports)} directions, {reps} replicates", worst)]

    def check_gaussian_ratios(self) -> List[CheckResult]:
        large_N = 2 ** 14 if self._budget >= 1.0 else 2 ** 10
        rows = self._sweep_ratios(ModelSpec.gaussian(), [16, 32], ["n", "4n", "n^2", large_N],
                                  [1, "sqrtN", "N/4", "N"], [1, 2, "log(N/ell)", "logN"])
        spread = summarize_ratios(rows).spread
        return [
            _bounds_check("gaussian_ratio_bounds", [row.ratio for row in rows]),
            CheckResult("gaussian_ratio_spread", spread <= MAX_GAUSSIAN_SPREAD,
                        f"max/min ratio over {len(rows)} cells", spread),
        ]

    def check_cone_ratios(self) -> List[CheckResult]:
        """Cone measure against the n^{-1/p} predictor, and stability of the ratio across p."""
        by_cell: Dict[tuple, List[float]] = {}
        ratios = []
        for p in SAMPLER_EXPONENTS:
            rows = self._sweep_ratios(ModelSpec.cone_lp(p), [16, 32], ["4n", "n^2"], [1, "sqrtN"], [2, "logN"])
            for row in rows:
                ratios.append(row.ratio)
                key = (row.params.n, row.params.N, row.params.ell, row.params.q)
                by_cell.setdefault(key, []).append(row.ratio)
        spread = max(max(values) / min(values) for values in by_cell.values())
        return [
            _bounds_check("cone_ratio_bounds", ratios),
            CheckResult("cone_ratio_across_p", spread <= MAX_EXPONENT_SPREAD,
                        f"max over {len(by_cell)} cells of the ratio spread across p", spread),
        ]

    def check_isotropic_ball_ratios(self) -> List[CheckResult]:
        """
        Volume-one l_p balls against the log-concave predictor.

        Ratios sit well below 1, roughly 0.15 to 0.4, since the marginals of
        the volume-one ball have standard deviation equal to its isotropic
        constant (about 0.25 for p in {1, 2}) rather than 1. The spread is
        taken per p so that constant cancels.
        """
        large_N = 2 ** 14 if self._budget >= 1.0 else 2 ** 10
        ratios = []
        spreads = []
        for p in (1.0, 2.0):
            rows = self._sweep_ratios(ModelSpec.isotropic_ball_lp(p), [16, 32], ["n", "4n", "n^2", large_N],
                                      [1, "sqrtN", "N"], [1, "logN"])
            ratios.extend(row.ratio for row in rows)
            spreads.append(summarize_ratios(rows).spread)
        spread = max(spreads)
        return [
            _bounds_check("isotropic_ball_ratio_bounds", ratios),
            CheckResult("isotropic_ball_ratio_spread", spread <= MAX_GAUSSIAN_SPREAD,
                        f"max over p in {{1, 2}} of max/min ratio, {len(ratios)} cells", spread),
        ]

    def check_comparison(self) -> List[CheckResult]:
        """E h_{K_{N,ell,1}} against E h_{K_{ceil(N/ell),1,1}} for the Gaussian model."""
        model = ModelSpec.gaussian()
        n = 16
        theta = Direction.basis(n, 0)
        reps = self._scaled(2_000, 100)
        ratios = []
        for N in (64, 256, 1024):
            for ell in (1, 4, 16):
                m = math.ceil(N / ell)
                if m < 2:
                    continue
                estimate = self.estimator.comparison(
                    model, validate_params(n, N, ell, 1.0), validate_params(n, m, 1, 1.0), theta, reps, self._seed
                )
                ratios.append(estimate.value)
        return [_bounds_check("comparison_ratio_bounds", ratios)]

    def check_general_q_comparison(self) -> List[CheckResult]:
        """
        E h_{K_{N,ell,q}}(theta) against (E max_{i<=ceil(N/ell)} |<G_i, theta>|^q)^{1/q}, q in {2, 3}.

        The top ell of N marginals behave like the maximum of N / ell of them,
        so the ratio stays within constant factors of 1.
        """
        model = ModelSpec.gaussian()
        n = 16
        theta = Direction.basis(n, 0)
        reps = self._scaled(2_000, 100)
        ratios = []
        index = 0
        for q in (2.0, 3.0):
            for N in (64, 256):
                for ell in (1, 4, 16):
                    body = self.estimator.support_expectation(
                        model, validate_params(n, N, ell, q), theta, reps, self._seed, grid_index=index
                    )
                    maximum = max_moment_estimate(model, n, math.ceil(N / ell), q, theta, reps, self._seed)
                    ratios.append(body.value / maximum.value)
                    index += 1
        return [_bounds_check("comparison_general_q_bounds", ratios)]

    def check_centroid_floating_bridge(self) -> List[CheckResult]:
        """Floating body at delta against the centroid body at log(1/delta), and centroid against K_{N,N,q}."""
        n = 8
        theta = Direction.basis(n, 0)
        n_samples = self._scaled(200_000, 20_000)
        reps = self._scaled(2_000, 100)
        floating_ratios = []
        centroid_ratios = []
        for model in (ModelSpec.gaussian(), ModelSpec.isotropic_ball_lp(1.0)):
            for delta in (math.exp(-2.0), math.exp(-3.0), math.exp(-4.0)):
                floating = floating_support_estimate(model, n, delta, theta, n_samples, self._seed)
                centroid = centroid_support_estimate(model, n, math.log(1.0 / delta), theta, n_samples, self._seed)
                floating_ratios.append(floating.value / centroid.value)
            for k, q in enumerate((1.0, 2.0, 3.0)):
                N = 64
                centroid = centroid_support_estimate(model, n, q, theta, n_samples, self._seed)
                body = self.estimator.support_expectation(
                    model, validate_params(n, N, N, q), theta, reps, self._seed, grid_index=k
                )
                centroid_ratios.append(centroid.value / body.value)
        return [
            _bounds_check("floating_over_centroid", floating_ratios),
            _bounds_check("centroid_over_top_average", centroid_ratios),
        ]

    # MARK: Formulas Suite
    def check_volume_hit_rate(self) -> List[CheckResult]:
        """Volume of B_p^n against the hit rate of uniform points in the cube, within 3 standard errors."""
        draws = self._scaled(1_000_000, 100_000)
        gen = self._generator(9)
        worst = 0.0
        for n in (2, 4, 6):
            for p in (1.0, 2.0, 4.0):
                points = gen.uniform(-1.0, 1.0, size=(draws, n))
                rate = float(np.mean(np.sum(np.abs(points) ** p, axis=1) <= 1.0))
                estimate = 2.0 ** n * rate
                std_error = 2.0 ** n * math.sqrt(rate * (1.0 - rate) / draws)
                worst = max(worst, abs(estimate - volume_bpn(n, p)) / std_error)
        return [CheckResult("volume_hit_rate", worst <= 3.0, f"max |z| over n <= 6, {draws} points", worst)]

    def check_volume_closed_form(self) -> List[CheckResult]:
        worst = 0.0
        for n in range(1, 11):
            euclidean = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
            worst = max(worst, abs(volume_bpn(n, 2.0) - euclidean) / euclidean)
            worst = max(worst, abs(volume_bpn(n, 1.0) - 2.0 ** n / math.factorial(n)) / (2.0 ** n / math.factorial(n)))
        return [CheckResult("volume_closed_form", worst <= 1e-12, "l_1 and l_2 balls, n <= 10", worst)]

    def check_c_n_asymptotics(self) -> List[CheckResult]:
        gap = abs(c_n_constant(10_000) / 100.0 - 1.0)
        return [CheckResult("c_n_over_sqrt_n", gap <= 0.01, "|c_n / sqrt(n) - 1| at n = 10^4", gap)]

    def check_gaussian_pnorm(self) -> List[CheckResult]:
        """E||G||_p by Monte Carlo within a factor 3 of its asymptotic order, n = 1000."""
        n = 1000
        reps = self._scaled(200, 50)
        g = self._generator(10).standard_normal((reps, n))
        ratios = []
        for p in (1.0, 2.0, 10.0, math.log(n)):
            estimate = float(np.mean(np.sum(np.abs(g) ** p, axis=1) ** (1.0 / p)))
            ratios.append(gaussian_pnorm_expectation(n, p) / estimate)
        return [_bounds_check("gaussian_pnorm_order", ratios, (1.0 / 3.0, 3.0))]

    def check_mean_width_consistency(self) -> List[CheckResult]:
        """mean_width_bpn(n, p) sqrt(n) = gaussian_pnorm_expectation(n, p*)."""
        worst = 0.0
        for n in (16, 1000):
            for p in (1.0, 1.5, 2.0, 4.0, math.inf):
                left = mean_width_bpn(n, p) * math.sqrt(n)
                right = gaussian_pnorm_expectation(n, conjugate_exponent(p))
                worst = max(worst, abs(left - right) / right)
        return [CheckResult("mean_width_duality", worst <= 1e-12, "relative gap over p and n", worst)]

    def check_gaussian_factorization(self) -> List[CheckResult]:
        """E h_{K_{N,ell,q}}(theta) = c_N w(K_{ell,q}) for Gaussian vectors."""
        n, N, ell, q = 4, 64, 4, 2.0
        body = self.estimator.support_expectation(
            ModelSpec.gaussian(), validate_params(n, N, ell, q), Direction.basis(n, 0),
            self._scaled(4_000, 400), self._seed,
        )
        reference = reference_body_width_estimate(N, ell, q, self._scaled(20_000, 2_000), self._seed)
        c_N = c_n_constant(N)
        combined = math.hypot(body.std_error, c_N * reference.std_error)
        return [_z_check("gaussian_factorization", body.value, c_N * reference.value, combined, 4.0)]

    def check_max_norm_bound(self) -> List[CheckResult]:
        reps = self._scaled(200, 20)
        worst = 0.0
        n = 16
        for model in (ModelSpec.gaussian(), ModelSpec.isotropic_ball_lp(1.0)):
            for N in (64, 4096):
                estimate = max_norm_estimate(model, n, N, reps, self._seed)
                worst = max(worst, estimate.value / paouris_max_norm_bound(n, N))
        return [CheckResult("max_norm_bound", worst <= 1.0, "max of E max ||X_i|| / (2 max{sqrt n, log N})", worst)]

    def check_paouris_tail(self) -> List[CheckResult]:
        """
        Empirical P(||X||_2 >= c t sqrt(n)) against e^{-t sqrt(n)}, n = 16.

        Passes when every rate minus 3 standard errors stays below the bound;
        the value is the largest such excess.
        """
        n = 16
        draws = self._scaled(200_000, 20_000)
        gen = self._generator(11)
        worst = -math.inf
        for model in (ModelSpec.gaussian(), ModelSpec.isotropic_ball_lp(1.0)):
            samples = sample_set(model, validate_params(n, draws, 1, 1.0), gen)
            norms = np.linalg.norm(samples.vectors, axis=1)
            for t in TAIL_LEVELS:
                rate = float(np.mean(norms >= paouris_threshold(t, n, PAOURIS_CHECK_CONSTANT)))
                std_error = math.sqrt(rate * (1.0 - rate) / draws)
                worst = max(worst, rate - 3.0 * std_error - paouris_tail(t, n))
        return [CheckResult("paouris_tail", worst <= 0.0,
                            f"c={PAOURIS_CHECK_CONSTANT:g}, t in {TAIL_LEVELS}, {draws} draws per model", worst)]

    def check_cone_deviation(self) -> List[CheckResult]:
        """Cone measure of ||Y||_r >= t / n^{1/p - 1/r} against exp(-t^p n^{p/r} / c), n = 16."""
        n = 16
        draws = self._scaled(200_000, 20_000)
        gen = self._generator(12)
        results = []
        for p, r, t in CONE_DEVIATION_CASES:
            y, _ = sample_cone_lp(n, p, gen, size=draws)
            norms = np.sum(np.abs(y) ** r, axis=1) ** (1.0 / r)
            rate = float(np.mean(norms >= cone_deviation_level(n, p, r, t)))
            std_error = math.sqrt(rate * (1.0 - rate) / draws)
            bound = cone_deviation_bound(n, p, r, t, CONE_DEVIATION_CONSTANT)
            excess = rate - 3.0 * std_error - bound
            results.append(CheckResult(f"cone_deviation_p{p:g}_r{r:g}", excess <= 0.0,
                                       f"rate {rate:.4g} vs bound {bound:.4g} at t={t:g}, {draws} draws", excess))
        return results

    def check_centroid_width(self) -> List[CheckResult]:
        ratios = []
        n = 16
        for q in (1.0, 2.0, 3.0):
            estimate = centroid_width_estimate(
                ModelSpec.gaussian(), n, q, self._scaled(256, 32), self._scaled(20_000, 5_000), self._seed
            )
            ratios.append(estimate.value / centroid_width_predictor(q, n))
        return [_bounds_check("centroid_width_sqrt_q", ratios)]

    # MARK: ETL Methods
    def extract(self) -> None:
        """
        Resolve the configured suite into its list of checks.

        Raises
        ------
        UnknownSuite
            If the suite name is not one of VERIFICATION_SUITES
        """
        try:
            if self._suite not in VERIFICATION_SUITES:
                raise UnknownSuite(f"Unknown suite {self._suite!r}; expected one of {VERIFICATION_SUITES}")
            if self._budget <= 0.0:
                raise ConfigInvalid(f"budget must be positive, got {self._budget}")

            self.checks = list(self.suites[self._suite])
            self.logger.info(f"Suite {self._suite}: {len(self.checks)} check groups, budget {self._budget:g}")

        except Exception as e:
            self.logger.error(f"Extraction failed: {e}")
            raise

    def transform(self) -> None:
        """
        Run every check group of the suite.

        A group that raises a library error is recorded as a failed check
        rather than aborting the suite.
        """
        try:
            if self._suite is None or not self.checks:
                raise ConfigInvalid("No checks to run. Call extract() first.")

            self.report = VerificationReport(self._suite, budget=self._budget, seed=self._seed)
            for check in self.checks:
                name = check.__name__.replace("check_", "")
                try:
                    results = check()
                except (KBodyError, ArithmeticError) as e:
                    self.logger.error(f"Check {name} raised: {e}")
                    results = [CheckResult(name, False, f"raised {type(e).__name__}: {e}")]

                for result in results:
                    status = "PASS" if result.passed else "FAIL"
                    self.logger.info(f"[{status}] {result.name}: {result.detail} (value={result.value:.6g})")
                self.report.checks.extend(results)

            self.logger.info(
                f"Suite {self._suite}: {len(self.report.checks) - len(self.report.failed_checks)}"
                f"/{len(self.report.checks)} checks passed"
            )

        except Exception as e:
            self.logger.error(f"Transformation failed: {e}")
            raise

    def load(self) -> Optional[str]:
        """
        Write the report as JSON when an output path is configured.

        Returns
        -------
        str or None
            Path to the created file
        """
        try:
            if self.report is None:
                raise ConfigInvalid("No report to export. Call transform() first.")
            if not self._output_path:
                return None
            return self.file.write_json(self.report.to_dict(), self._output_path)

        except Exception as e:
            self.logger.error(f"Failed to save report: {e}")
            raise

    def main(self) -> Dict[str, Any]:
        """
        Main orchestration method for a verification run.

        For convenience, use run(suite, budget, seed, output_path) instead.

        Returns
        -------
        Dict[str, Any]
            Dictionary with status, passed flag, output_path and failed check names
        """
        try:
            self.logger.info(f"Starting verification suite {self._suite}")
            self.extract()
            self.transform()
            output_path = self.load()
            assert self.report is not None

            return {
                "status": "success" if self.report.passed else "failed",
                "passed": self.report.passed,
                "output_path": output_path,
                "check_count": len(self.report.checks),
                "failed_checks": self.report.failed_checks,
            }

        except Exception as e:
            self.logger.error(f"Verification failed: {e}")
            raise

    def run(
        self, suite: str, budget: float = 1.0, seed: int = DEFAULT_MASTER_SEED, output_path: Optional[str] = None
    ) -> Dict[str, Any]:
        """
        Convenience method to run a suite.

        Parameters
        ----------
        suite : str
            One of pathwise, samplers, orlicz, ratios, formulas
        budget : float
            Multiplier on Monte Carlo sizes
        seed : int
            Master seed for every random stream
        output_path : str, optional
            Where to write the JSON report

        Returns
        -------
        Dict[str, Any]
            Dictionary with status, passed flag, output_path and failed check names
        """
        self._suite = suite
        self._budget = float(budget)
        self._seed = int(seed)
        self._output_path = output_path
        return self.main()


def run_verification(
    suite: str,
    budget: float = 1.0,
    seed: int = DEFAULT_MASTER_SEED,
    output_path: Optional[str] = None,
    workers: Optional[int] = None,
    bit_exact: Optional[bool] = None,
    log_path: str = "verification/verification.log",
) -> VerificationReport:
    """
    Run one suite and return its report.

    Raises
    ------
    UnknownSuite
        If suite is not a known suite name
    """
    if suite not in VERIFICATION_SUITES:
        raise UnknownSuite(f"Unknown suite {suite!r}; expected one of {VERIFICATION_SUITES}")
    runner = VerificationRunner(log_path, workers=workers, bit_exact=bit_exact)
    try:
        runner.run(suite, budget=budget, seed=seed, output_path=output_path)
        assert runner.report is not None
        return runner.report
    finally:
        runner.dispose()
