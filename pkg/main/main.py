# Command-line entry point for random convex body experiments
# Run with: python -m main.main <command> [options]

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from config.defaults import (
    DEFAULT_DIRECTIONS,
    DEFAULT_MASTER_SEED,
    DEFAULT_REPLICATES,
    ENV_MASTER_SEED,
    EXIT_CONFIG_ERROR,
    EXIT_IO_ERROR,
    EXIT_SUCCESS,
    EXIT_VERIFICATION_FAILED,
    OUTPUT_FORMATS,
    QUICK_BUDGET,
    ROLE_DIRECTIONS,
    ROLE_SAMPLES,
    VERIFICATION_SUITES,
)
from scripts.base import env_bit_exact, env_workers
from scripts.sweep import SweepConfig, SweepRunner, predictor_for, summarize_ratios
from scripts.verification import VerificationRunner
from utils.core import Direction, ModelSpec, validate_params
from utils.errors import ConfigInvalid, KBodyError, PersistenceError
from utils.file import File
from utils.geometry import Estimator, MeanWidthConfig, support_value
from utils.orlicz import EmpiricalDistribution, OrliczFunction, verify_mstar_identity
from utils.samplers import RngStream, sample_set, sample_unit_direction

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _default_seed() -> int:
    try:
        return int(os.getenv(ENV_MASTER_SEED, str(DEFAULT_MASTER_SEED)))
    except ValueError:
        return DEFAULT_MASTER_SEED


def _log_to_file(log_file: Optional[str]) -> None:
    """Send module-level logging to logs/<log_file> for commands that do not build a runner."""
    if not log_file:
        return
    path = os.path.join("logs", log_file)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    logging.basicConfig(filename=path, filemode="w", level=logging.INFO, format=LOG_FORMAT)


def _add_body_arguments(parser: argparse.ArgumentParser, with_shape: bool = True) -> None:
    parser.add_argument("--model", type=ModelSpec.parse, default=ModelSpec.gaussian(),
                        help="gaussian, cone:p, ball:p or isoball:p")
    parser.add_argument("--n", type=int, required=True, help="dimension")
    parser.add_argument("--N", type=int, required=True, help="number of random vectors")
    if with_shape:
        parser.add_argument("--ell", type=int, default=1, help="order-statistic depth")
        parser.add_argument("--q", type=float, default=1.0, help="moment exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="random-convex-widths",
        description="Random convex bodies K_{N,ell,q}: sampling, support functions, mean widths and checks.",
    )
    parser.add_argument("--seed", type=int, default=None, help="master seed (default: MASTER_SEED)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: WORKER_THREADS)")
    parser.add_argument("--bit-exact", action=argparse.BooleanOptionalAction, default=None,
                        help="deterministic reduction order (default: BIT_EXACT)")
    parser.add_argument("--log-file", default=None, help="log file path under logs/")
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", help="dump one sample set as CSV")
    _add_body_arguments(sample, with_shape=False)
    sample.add_argument("--output", default=None, help="CSV path (default: OUTPUT_PATH/samples_<time>.csv)")

    support = commands.add_parser("support", help="support value of one realization")
    _add_body_arguments(support)
    support.add_argument("--theta", type=_float_list, default=None, help="unit direction, comma-separated")

    meanwidth = commands.add_parser("meanwidth", help="Monte Carlo estimate of the expected mean width")
    _add_body_arguments(meanwidth)
    meanwidth.add_argument("--directions", type=int, default=DEFAULT_DIRECTIONS)
    meanwidth.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES)
    meanwidth.add_argument("--antithetic", action="store_true")

    orlicz = commands.add_parser("orlicz", help="evaluate or verify M_ell")
    orlicz.add_argument("--dist", choices=["halfnormal", "gaussian-power", "constant"], default="halfnormal")
    orlicz.add_argument("--q", type=float, default=1.0, help="power for gaussian-power")
    orlicz.add_argument("--c", type=float, default=1.0, help="value for constant")
    orlicz.add_argument("--ell", type=float, default=1.0)
    orlicz.add_argument("--s", type=_float_list, default=[0.5, 1.0, 2.0], help="points to evaluate M_ell at")
    orlicz.add_argument("--verify", action="store_true", help="check the conjugate identity on a beta grid")
    orlicz.add_argument("--beta", type=_float_list, default=[0.05, 0.1, 0.25, 0.5, 0.75, 0.9])

    sweep = commands.add_parser("sweep", help="run a parameter sweep from a JSON config")
    sweep.add_argument("config", help="path to the sweep config JSON")
    sweep.add_argument("--output", default=None, help="override output_path")
    sweep.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="override format")

    verify = commands.add_parser("verify", help="run a verification suite")
    verify.add_argument("suite", choices=VERIFICATION_SUITES)
    verify.add_argument("--budget", type=float, default=1.0, help="multiplier on Monte Carlo sizes")
    verify.add_argument("--quick", action="store_true", help=f"shorthand for --budget {QUICK_BUDGET:g}")
    verify.add_argument("--output", default=None, help="JSON report path")

    return parser


# MARK: Commands
def cmd_sample(args: argparse.Namespace) -> int:
    _log_to_file(args.log_file)
    params = validate_params(args.n, args.N, 1, 1.0)
    samples = sample_set(args.model, params, RngStream(args.seed, 0, ROLE_SAMPLES))
    file = File()
    output_path = args.output or file.get_default_output_path("samples", "csv")
    file.write_matrix_csv(samples.vectors, output_path)
    print(f"Wrote {samples.N} x {samples.n} {args.model.label} sample: {output_path}")
    return EXIT_SUCCESS


def cmd_support(args: argparse.Namespace) -> int:
    _log_to_file(args.log_file)
    params = validate_params(args.n, args.N, args.ell, args.q)
    samples = sample_set(args.model, params, RngStream(args.seed, 0, ROLE_SAMPLES))
    if args.theta is None:
        theta = sample_unit_direction(params.n, RngStream(args.seed, 0, ROLE_DIRECTIONS))
    else:
        theta = Direction(args.theta)
    value = support_value(samples, theta, params.ell, params.q)
    print(f"h_K(theta) = {value:.17g}")
    return EXIT_SUCCESS


def cmd_meanwidth(args: argparse.Namespace) -> int:
    _log_to_file(args.log_file)
    params = validate_params(args.n, args.N, args.ell, args.q)
    cfg = MeanWidthConfig(args.directions, args.replicates, args.antithetic)
    estimator = Estimator(workers=args.threads, bit_exact=args.bit_exact)
    report = estimator.mean_width(args.model, params, cfg, args.seed)
    predicted = predictor_for(args.model, params)

    print(f"E w(K) = {report.value:.10g} +/- {report.std_error:.3g} ({args.model.label}, {params})")
    if predicted.value > 0.0:
        print(f"predictor = {predicted.value:.10g} [{predicted.regime}], ratio = {report.value / predicted.value:.6g}")
    return EXIT_SUCCESS


def cmd_orlicz(args: argparse.Namespace) -> int:
    _log_to_file(args.log_file)
    if args.dist == "halfnormal":
        dist = EmpiricalDistribution.half_normal()
    elif args.dist == "gaussian-power":
        dist = EmpiricalDistribution.gaussian_power(args.q)
    else:
        dist = EmpiricalDistribution.constant(args.c)

    M = OrliczFunction.from_distribution(dist, args.ell)
    for s in args.s:
        print(f"{M.name}({s:g}) = {M(s):.12g}")

    if args.verify:
        report = verify_mstar_identity(dist, args.ell, args.beta)
        for row in report.rows:
            print(f"beta={row.beta:g}: M*={row.conjugate:.10g} target={row.target:.10g} "
                  f"relative residual={row.relative_residual:.3g}")
        print(f"max relative residual = {report.max_relative_residual:.3g}")
        if report.max_relative_residual > 0.02:
            return EXIT_VERIFICATION_FAILED
    return EXIT_SUCCESS


def cmd_sweep(args: argparse.Namespace) -> int:
    file = File()
    data = file.read_sweep_config(args.config)
    if args.output:
        data["output_path"] = args.output
    if args.format:
        data["format"] = args.format
    if args.seed_given or "master_seed" not in data:
        data["master_seed"] = args.seed
    cfg = SweepConfig.from_dict(data)
    if not cfg.output_path:
        cfg = replace(cfg, output_path=file.get_default_output_path("sweep", cfg.format))

    runner = SweepRunner(args.log_file or "sweep/sweep.log", workers=args.threads, bit_exact=args.bit_exact)
    try:
        runner.set_progress_callback(lambda current, total, message: print(f"[{current}/{total}] {message}"))
        result = runner.run(cfg)
        usable = [row for row in runner.rows if row.predictor > 0.0]
        if usable:
            summary = summarize_ratios(usable)
            print(f"ratios in [{summary.min_ratio:.4g}, {summary.max_ratio:.4g}], spread {summary.spread:.4g}")
        if result["bounded_rows"]:
            print(f"many-points bounds: {result['outside_bounds']}/{result['bounded_rows']} rows outside")
        print(f"Sweep complete: {result['row_count']} rows -> {result['output_path']}")
        return EXIT_SUCCESS
    finally:
        runner.dispose()


def cmd_verify(args: argparse.Namespace) -> int:
    budget = QUICK_BUDGET if args.quick else args.budget
    if budget <= 0.0:
        raise ConfigInvalid(f"budget must be positive, got {budget}")

    runner = VerificationRunner(
        args.log_file or "verification/verification.log", workers=args.threads, bit_exact=args.bit_exact
    )
    try:
        result = runner.run(args.suite, budget=budget, seed=args.seed, output_path=args.output)
        assert runner.report is not None
        for check in runner.report.checks:
            print(f"[{'PASS' if check.passed else 'FAIL'}] {check.name}: {check.detail}")
        print(f"Suite {args.suite}: {'passed' if result['passed'] else 'FAILED'}")
        return EXIT_SUCCESS if result["passed"] else EXIT_VERIFICATION_FAILED
    finally:
        runner.dispose()


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "sample": cmd_sample,
    "support": cmd_support,
    "meanwidth": cmd_meanwidth,
    "orlicz": cmd_orlicz,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run the command and map failures to exit codes.

    Returns
    -------
    int
        0 on success, 1 when verification fails, 2 on invalid input or
        configuration, 3 on I/O failure
    """
    load_dotenv()
    args = build_parser().parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = _default_seed()
    if args.threads is None:
        args.threads = env_workers()
    if args.bit_exact is None:
        args.bit_exact = env_bit_exact()

    try:
        return COMMANDS[args.command](args)
    except (PersistenceError, OSError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO_ERROR
    except (KBodyError, ValueError) as e:
        print(f"Invalid input: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
