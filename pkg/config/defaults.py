# Default settings for random convex body experiments
# Monte Carlo budgets, output columns, environment variable names and numerical tolerances

import sys

VERSION = "1.0.0"

# Monte Carlo budget
DEFAULT_REPLICATES = 200
DEFAULT_DIRECTIONS = 64
DEFAULT_MASTER_SEED = 20240101
DEFAULT_WORKERS = 1

# Environment variables
ENV_WORKER_THREADS = "WORKER_THREADS"
ENV_OUTPUT_PATH = "OUTPUT_PATH"
ENV_MASTER_SEED = "MASTER_SEED"
ENV_BIT_EXACT = "BIT_EXACT"
DEFAULT_OUTPUT_DIR = "./output"

# Output layout
CSV_COLUMNS = [
    "model", "p", "n", "N", "ell", "q", "replicates", "directions",
    "estimate", "std_error", "predictor", "ratio", "regime", "seed",
    "lower_bound", "upper_bound", "bound_status",
]
OUTPUT_FORMATS = ("csv", "json", "xlsx")
CSV_FLOAT_FORMAT = "%.17g"

# bound_status values for rows with N > e^sqrt(n)
BOUND_WITHIN = "within"
BOUND_BELOW = "below"
BOUND_ABOVE = "above"

# Verification suites
VERIFICATION_SUITES = ("pathwise", "samplers", "orlicz", "ratios", "formulas")

# Random stream roles (third component of the spawn key)
ROLE_SAMPLES = 1
ROLE_DIRECTIONS = 2
ROLE_RADIAL = 3
ROLE_AUXILIARY = 4

# CLI exit codes
EXIT_SUCCESS = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3

# Numerical tolerances
UNIT_NORM_TOL = 1e-12
CONVEXITY_TOL = 1e-9
ROOT_RTOL = 1e-10
QUAD_ABS_TOL = 1e-8
TAIL_QUANTILE = 1.0 - 1e-9
MAX_BRACKET_STEPS = 200
MIN_TAIL_COUNT = 50
PATHWISE_RTOL = 4 * sys.float_info.epsilon
RATIO_BOUNDS = (1.0 / 8.0, 8.0)
MAX_GAUSSIAN_SPREAD = 4.0
MAX_EXPONENT_SPREAD = 3.0
QUICK_BUDGET = 0.1
