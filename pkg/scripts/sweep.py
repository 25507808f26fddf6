# Parameter sweeps of the expected mean width against closed-form predictors
# Inherits from Base class for logging infrastructure
# Expands (n, N, ell, q) grids, estimates each point and writes ratio tables

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.defaults import (
    BOUND_ABOVE,
    BOUND_BELOW,
    BOUND_WITHIN,
    CSV_COLUMNS,
    DEFAULT_DIRECTIONS,
    DEFAULT_MASTER_SEED,
    DEFAULT_REPLICATES,
    OUTPUT_FORMATS,
)
from scripts.base import Base
from utils.core import ModelSpec, Params, validate_params
from utils.errors import ConfigInvalid, EmptyInput, InvalidModel, InvalidParams, OutOfRange
from utils.geometry import Estimator, MeanWidthConfig
from utils.predictors import (
    PredictorValue,
    many_points_lower,
    many_points_upper,
    predictor_logconcave,
    predictor_lp,
)

logger = logging.getLogger(__name__)

GridEntry = Any


@dataclass(frozen=True)
class SweepConfig:
    """
    Sweep over a grid of (n, N, ell, q).

    Grid entries are numbers or symbolic strings resolved per grid point:
    N may be written in terms of n ("n", "4n", "n^2"), ell in terms of N
    ("sqrtN", "N/4", "N") and q in terms of N and ell ("log(N/ell)", "logN").
    """
    model: ModelSpec
    n_grid: List[GridEntry]
    N_grid: List[GridEntry]
    ell_grid: List[GridEntry]
    q_grid: List[GridEntry]
    mc: MeanWidthConfig = field(default_factory=lambda: MeanWidthConfig(DEFAULT_DIRECTIONS, DEFAULT_REPLICATES))
    master_seed: int = DEFAULT_MASTER_SEED
    output_path: str = ""
    format: str = "csv"

    def __post_init__(self) -> None:
        for name in ("n_grid", "N_grid", "ell_grid", "q_grid"):
            if not getattr(self, name):
                raise ConfigInvalid(f"{name} is empty")
        if self.format not in OUTPUT_FORMATS:
            raise ConfigInvalid(f"Unknown format {self.format!r}; expected one of {OUTPUT_FORMATS}")
        if self.master_seed < 0:
            raise ConfigInvalid(f"master_seed must be non-negative, got {self.master_seed}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        """
        Build a config from its JSON form.

        Raises
        ------
        ConfigInvalid
            On missing keys, malformed grids or an invalid model / budget
        """
        try:
            model = data["model"]
            model = model if isinstance(model, ModelSpec) else ModelSpec.parse(str(model))
            mc_data = data.get("mc", {})
            mc = MeanWidthConfig(
                n_directions=int(mc_data.get("n_directions", DEFAULT_DIRECTIONS)),
                n_replicates=int(mc_data.get("n_replicates", DEFAULT_REPLICATES)),
                antithetic=bool(mc_data.get("antithetic", False)),
            )
            return cls(
                model=model,
                n_grid=expand_grid_entries(data["n"], integer=True),
                N_grid=expand_grid_entries(data["N"], integer=True),
                ell_grid=expand_grid_entries(data["ell"], integer=True),
                q_grid=expand_grid_entries(data["q"], integer=False),
                mc=mc,
                master_seed=int(data.get("master_seed", DEFAULT_MASTER_SEED)),
                output_path=str(data.get("output_path", "")),
                format=str(data.get("format", "csv")),
            )
        except ConfigInvalid:
            raise
        except KeyError as e:
            raise ConfigInvalid(f"Sweep config is missing key {e}") from e
        except (InvalidModel, OutOfRange, TypeError, ValueError) as e:
            raise ConfigInvalid(f"Sweep config is invalid: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        model = self.model.variant.value if self.model.p is None else f"{self.model.variant.value}:{self.model.p:g}"
        return {
            "model": model,
            "n": list(self.n_grid),
            "N": list(self.N_grid),
            "ell": list(self.ell_grid),
            "q": list(self.q_grid),
            "mc": {
                "n_directions": self.mc.n_directions,
                "n_replicates": self.mc.n_replicates,
                "antithetic": self.mc.antithetic,
            },
            "master_seed": self.master_seed,
            "output_path": self.output_path,
            "format": self.format,
        }


@dataclass(frozen=True)
class RatioRow:
    """One grid point: estimate, predictor and their ratio, plus many-points bounds when they apply."""
    params: Params
    model: ModelSpec
    estimate: float
    std_error: float
    predictor: float
    ratio: float
    regime: str
    replicates: int
    directions: int
    seed: int
    predictor_family: str = "logconcave"
    lower_bound: float = float("nan")
    upper_bound: float = float("nan")
    bound_status: str = ""

    def to_record(self) -> Dict[str, Any]:
        return {
            "model": self.model.label,
            "p": self.model.p if self.model.p is not None else float("nan"),
            "n": self.params.n,
            "N": self.params.N,
            "ell": self.params.ell,
            "q": self.params.q,
            "replicates": self.replicates,
            "directions": self.directions,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "predictor": self.predictor,
            "ratio": self.ratio,
            "regime": self.regime,
            "seed": self.seed,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "bound_status": self.bound_status,
        }


@dataclass(frozen=True)
class RegimeSummary:
    min_ratio: float
    max_ratio: float
    spread: float
    count: int


@dataclass(frozen=True)
class RatioSummary:
    min_ratio: float
    max_ratio: float
    spread: float
    count: int
    per_regime: Dict[str, RegimeSummary]

    def to_frame(self) -> pd.DataFrame:
        records = [{"regime": "all", "min_ratio": self.min_ratio, "max_ratio": self.max_ratio,
                    "spread": self.spread, "count": self.count}]
        for regime, summary in self.per_regime.items():
            records.append({"regime": regime, "min_ratio": summary.min_ratio, "max_ratio": summary.max_ratio,
                            "spread": summary.spread, "count": summary.count})
        return pd.DataFrame(records)


@dataclass(frozen=True)
class GridPoint:
    index: int
    params: Params


# MARK: Grid Expansion
_COUNT_PATTERN = re.compile(r"^(\d+)?\*?n(?:\^(\d+))?$")
_POWER_PATTERN = re.compile(r"^(\d+)\^(\d+)$")


def expand_grid_entries(entries: Any, integer: bool) -> List[GridEntry]:
    """
    Expand a JSON grid into a list of numbers and symbolic strings.

    Accepts a list, a scalar, or {"logspace": [start, stop, num]} with base-2
    exponents; integer grids round logspace values.
    """
    if isinstance(entries, dict):
        if "logspace" not in entries:
            raise ConfigInvalid(f"Unknown grid form {entries!r}")
        start, stop, num = entries["logspace"]
        values = np.logspace(float(start), float(stop), int(num), base=2.0)
        if integer:
            return sorted({int(round(v)) for v in values})
        return [float(v) for v in values]
    if isinstance(entries, (list, tuple)):
        return list(entries)
    return [entries]


def _number(entry: Any, name: str) -> float:
    if isinstance(entry, bool):
        raise ConfigInvalid(f"{name} entry {entry!r} is not a number")
    if isinstance(entry, (int, float)):
        return float(entry)
    text = str(entry).strip()
    match = _POWER_PATTERN.match(text)
    if match:
        return float(int(match.group(1)) ** int(match.group(2)))
    try:
        return float(text)
    except ValueError as e:
        raise ConfigInvalid(f"Cannot resolve {name} entry {entry!r}") from e


def resolve_N(entry: GridEntry, n: int) -> int:
    """N entry: number, "2^14", or a multiple / power of n such as "4n", "n^2"."""
    if isinstance(entry, str):
        match = _COUNT_PATTERN.match(entry.strip().replace(" ", ""))
        if match:
            coefficient = int(match.group(1) or 1)
            exponent = int(match.group(2) or 1)
            return coefficient * n ** exponent
    return int(round(_number(entry, "N")))


def resolve_ell(entry: GridEntry, N: int) -> int:
    """
    ell entry: number, "N", "sqrtN", "N/k".

    Symbolic values are rounded to the nearest integer in [1, N]; explicit
    numbers are returned unchanged and validated later.
    """
    if isinstance(entry, str):
        text = entry.strip().replace(" ", "")
        value: Optional[float] = None
        if text == "N":
            value = N
        elif text in ("sqrtN", "sqrt(N)"):
            value = math.sqrt(N)
        elif text.startswith("N/"):
            value = N / _number(text[2:], "ell")
        if value is not None:
            return int(min(max(round(value), 1), N))
    return int(round(_number(entry, "ell")))


def resolve_q(entry: GridEntry, N: int, ell: int) -> float:
    """q entry: number, "log(N/ell)" or "logN"; symbolic values are clamped to >= 1."""
    if isinstance(entry, str):
        text = entry.strip().replace(" ", "")
        if text in ("log(N/ell)", "logN/ell"):
            return max(1.0, math.log(N / ell))
        if text in ("logN", "log(N)"):
            return max(1.0, math.log(N))
    return _number(entry, "q")


def expand_grid(cfg: SweepConfig) -> List[GridPoint]:
    """
    Resolve every grid combination into validated Params, in grid order.

    Duplicate points (after symbolic resolution) keep their first occurrence.

    Raises
    ------
    ConfigInvalid
        If a resolved point is invalid, e.g. an explicit ell exceeds N
    """
    points: List[GridPoint] = []
    seen = set()
    for n_entry in cfg.n_grid:
        n = int(round(_number(n_entry, "n")))
        for N_entry in cfg.N_grid:
            N = resolve_N(N_entry, n)
            if math.log(N) > math.sqrt(n):
                logger.warning(f"N={N} exceeds e^sqrt(n) for n={n}; isotropic rows also get many-points bounds")
            for ell_entry in cfg.ell_grid:
                ell = resolve_ell(ell_entry, N)
                for q_entry in cfg.q_grid:
                    q = resolve_q(q_entry, N, ell)
                    try:
                        params = validate_params(n, N, ell, q)
                    except InvalidParams as e:
                        raise ConfigInvalid(f"Invalid grid point (n={n}, N={N}, ell={ell}, q={q}): {e}") from e
                    key = (params.n, params.N, params.ell, params.q)
                    if key in seen:
                        continue
                    seen.add(key)
                    points.append(GridPoint(index=len(points), params=params))
    return points


def predictor_for(model: ModelSpec, params: Params) -> PredictorValue:
    """logconcave predictor for isotropic laws, the n^{-1/p} lp predictor for sphere / unit-ball laws."""
    if model.is_isotropic:
        return predictor_logconcave(params.n, params.N, params.ell, params.q)
    return predictor_lp(params.n, params.N, params.ell, params.q, model.p)


def beyond_sqrt_n(params: Params) -> bool:
    """Whether N > e^sqrt(n), where predictor_logconcave no longer applies."""
    return math.log(params.N) > math.sqrt(params.n)


def many_points_bounds(model: ModelSpec, params: Params) -> Optional[Tuple[float, float]]:
    """
    (lower, upper) many-points bounds for an isotropic law with N > e^sqrt(n).

    Returns None for sphere / unit-ball laws and for N <= e^sqrt(n).
    """
    if not model.is_isotropic or not beyond_sqrt_n(params):
        return None
    lower = many_points_lower(params.n, params.N, params.ell, params.q)
    upper = many_points_upper(params.n, params.N, params.ell, params.q)
    return lower.value, upper.value


def bound_status(estimate: float, lower: float, upper: float) -> str:
    """Where an estimate falls against [lower, upper]: below, within or above."""
    if estimate < lower:
        return BOUND_BELOW
    if estimate > upper:
        return BOUND_ABOVE
    return BOUND_WITHIN


def estimate_grid(
    estimator: Estimator,
    cfg: SweepConfig,
    grid: Sequence[GridPoint],
    progress: Optional[Callable[[int, int, str], None]] = None,
) -> List[RatioRow]:
    """
    Estimate the expected mean width at every grid point and form ratios.

    Grid points run one after another; each point's replicates go to the
    estimator's worker pool under the point's grid index. Isotropic points
    with N > e^sqrt(n) also record the many-points bounds and whether the
    estimate lies between them.
    """
    rows: List[RatioRow] = []
    family = "logconcave" if cfg.model.is_isotropic else "lp"
    for point in grid:
        params = point.params
        if progress:
            progress(point.index + 1, len(grid), f"Estimating {params}")
        report = estimator.mean_width(cfg.model, params, cfg.mc, cfg.master_seed, grid_index=point.index)
        predicted = predictor_for(cfg.model, params)
        ratio = report.value / predicted.value if predicted.value > 0.0 else float("nan")

        lower, upper, status = float("nan"), float("nan"), ""
        bounds = many_points_bounds(cfg.model, params)
        if bounds is not None:
            lower, upper = bounds
            status = bound_status(report.value, lower, upper)
            logger.info(f"{params}: estimate {report.value:.6g} {status} many-points bounds [{lower:.6g}, {upper:.6g}]")

        rows.append(RatioRow(
            params=params,
            model=cfg.model,
            estimate=report.value,
            std_error=report.std_error,
            predictor=predicted.value,
            ratio=ratio,
            regime=predicted.regime,
            replicates=cfg.mc.n_replicates,
            directions=cfg.mc.n_directions,
            seed=cfg.master_seed,
            predictor_family=family,
            lower_bound=lower,
            upper_bound=upper,
            bound_status=status,
        ))
    return rows



def rows_to_frame(rows: Sequence[RatioRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_record() for row in rows], columns=CSV_COLUMNS)


def summarize_ratios(rows: Sequence[RatioRow]) -> RatioSummary:
    """
    Min, max and spread = max/min of the estimate/predictor ratios, overall and per regime.

    Rows whose predictor is 0 carry no ratio and are skipped.

    Raises
    ------
    EmptyInput
        If no row has a positive predictor
    """
    usable = [row for row in rows if row.predictor > 0.0]
    if len(usable) < len(rows):
        logger.warning(f"Skipping {len(rows) - len(usable)} rows with zero predictor")
    if not usable:
        raise EmptyInput("No rows with a positive predictor to summarize")

    def summary(subset: List[RatioRow]) -> RegimeSummary:
        ratios = [row.ratio for row in subset]
        low, high = min(ratios), max(ratios)
        spread = high / low if low > 0.0 else math.inf
        return RegimeSummary(low, high, spread, len(subset))

    per_regime: Dict[str, RegimeSummary] = {}
    for regime in dict.fromkeys(row.regime for row in usable):
        per_regime[regime] = summary([row for row in usable if row.regime == regime])

    overall = summary(usable)
    return RatioSummary(overall.min_ratio, overall.max_ratio, overall.spread, overall.count, per_regime)


class SweepRunner(Base):
    """
    Runs mean-width sweeps and writes ratio tables.

    Inherits from Base class to get logging infrastructure and utility access.
    """

    def __init__(self, file_path: str, workers: Optional[int] = None, bit_exact: Optional[bool] = None):
        """
        Initialize the sweep runner.

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
        logger_name = f"scripts.sweep.instance_{self.instance_id}"
        self.logger = logging.getLogger(logger_name)

        self.grid: List[GridPoint] = []
        self.rows: List[RatioRow] = []
        self.progress_callback: Optional[Callable[[int, int, str], None]] = None

        # ETL parameters (set before calling extract/load)
        self._config: Optional[SweepConfig] = None

        self.logger.info("Initialized SweepRunner class")

    # MARK: Configuration
    def set_progress_callback(self, callback: Callable[[int, int, str], None]) -> None:
        """
        Set callback function for progress updates.

        Parameters
        ----------
        callback : Callable[[int, int, str], None]
            Function that receives (current, total, message)
        """
        self.progress_callback = callback

    def _update_progress(self, current: int, total: int, message: str) -> None:
        if self.progress_callback:
            self.progress_callback(current, total, message)

    # MARK: ETL Methods
    def extract(self) -> None:
        """
        Expand the configured grid into validated parameter points.

        Raises
        ------
        ConfigInvalid
            If no config is set or the grid is empty or invalid
        """
        try:
            if self._config is None:
                raise ConfigInvalid("No sweep config provided. Set _config before calling extract().")

            self.grid = expand_grid(self._config)
            if not self.grid:
                raise ConfigInvalid("Sweep grid is empty")
            self.logger.info(f"Expanded grid: {len(self.grid)} points for {self._config.model.label}")

        except Exception as e:
            self.logger.error(f"Extraction failed: {e}")
            raise

    def transform(self) -> None:
        """
        Estimate the expected mean width at every grid point and form ratios.
        """
        try:
            if self._config is None or not self.grid:
                raise ConfigInvalid("No grid to transform. Call extract() first.")

            self.rows = estimate_grid(self.estimator, self._config, self.grid, self._update_progress)
            self.logger.info(f"Transformation complete: {len(self.rows)} rows")

        except Exception as e:
            self.logger.error(f"Transformation failed: {e}")
            raise

    def load(self) -> Optional[str]:
        """
        Write the ratio table to the configured output path.

        Returns
        -------
        str or None
            Path to the created file, None when no output path is configured
        """
        try:
            if self._config is None or not self.rows:
                raise ConfigInvalid("No rows to export. Call extract() and transform() first.")
            if not self._config.output_path:
                self.logger.info("No output path configured; skipping export")
                return None

            summary = None
            if any(row.predictor > 0.0 for row in self.rows):
                summary = summarize_ratios(self.rows).to_frame()
            return self.file.write_rows(
                rows_to_frame(self.rows),
                self._config.output_path,
                fmt=self._config.format,
                header=self._config.to_dict(),
                summary=summary,
            )

        except Exception as e:
            self.logger.error(f"Failed to save results: {e}")
            raise

    def main(self) -> Dict[str, Any]:
        """
        Main orchestration method for a sweep.

        For convenience, use run(cfg) instead.

        Returns
        -------
        Dict[str, Any]
            Dictionary with status, output_path, row count, ratio spread and
            the number of rows checked against (and outside) many-points bounds
        """
        try:
            if self._config is None:
                raise ConfigInvalid("No sweep config provided. Set _config before calling main().")

            self.logger.info(f"Starting sweep for {self._config.model.label}")
            self.extract()
            self.transform()
            output_path = self.load()

            usable = [row for row in self.rows if row.predictor > 0.0]
            spread = summarize_ratios(usable).spread if usable else float("nan")
            bounded = [row for row in self.rows if row.bound_status]
            outside = [row for row in bounded if row.bound_status != BOUND_WITHIN]
            self.logger.info(f"Sweep complete: {len(self.rows)} rows, ratio spread {spread:.4g}")
            if outside:
                self.logger.warning(f"{len(outside)}/{len(bounded)} rows fall outside their many-points bounds")

            return {
                "status": "success",
                "output_path": output_path,
                "row_count": len(self.rows),
                "spread": spread,
                "bounded_rows": len(bounded),
                "outside_bounds": len(outside),
            }

        except Exception as e:
            self.logger.error(f"Sweep failed: {e}")
            raise

    def run(self, cfg: SweepConfig) -> Dict[str, Any]:
        """
        Convenience method to run a sweep.

        Parameters
        ----------
        cfg : SweepConfig
            Sweep configuration

        Returns
        -------
        Dict[str, Any]
            Dictionary with status, output_path, row count and ratio spread
        """
        self._config = cfg
        return self.main()


def run_sweep(
    cfg: SweepConfig,
    workers: Optional[int] = None,
    bit_exact: Optional[bool] = None,
    log_path: str = "sweep/sweep.log",
) -> List[RatioRow]:
    """Run a sweep end to end and return its rows in grid order."""
    runner = SweepRunner(log_path, workers=workers, bit_exact=bit_exact)
    try:
        runner.run(cfg)
        return list(runner.rows)
    finally:
        runner.dispose()
