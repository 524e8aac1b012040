from typing import Dict, List, Tuple

# API Configuration
API_HOST = "0.0.0.0"
API_PORT = 8000

# App metadata
APP_TITLE = "SOOT Deconvolution API"
APP_DESCRIPTION = "Sparse blind deconvolution with the smoothed l1/l2 penalty, plus a reweighted-l1 baseline"
APP_VERSION = "1.0.0"

ALLOWED_ORIGINS = [
    "http://localhost:3000",
    "http://localhost:5173",
]

# Operator norms
POWER_ITERATION_TOL = 1e-6
POWER_ITERATION_MAX_ITER = 500
POWER_ITERATION_SEED = 0
NORM_SAFETY_FACTOR = 1.01

# Metric floor keeping the scalar kernel metric invertible
METRIC_FLOOR = 1e-10

# Box-ball projection (Dykstra)
PROJECTION_TOL = 1e-10
PROJECTION_MAX_ITER = 10000
FEASIBILITY_TOL = 1e-8

# SOOT solver defaults
DEFAULT_INNER_X = 71          # J
DEFAULT_INNER_H = 1           # I
DEFAULT_STEP = 1.0
DEFAULT_GAMMA_LOW = 0.01
DEFAULT_GAMMA_HIGH = 0.01
DEFAULT_STOP_TOL = 1e-6       # applied as stop_tol * sqrt(N)
DEFAULT_MAX_OUTER = 5000
DESCENT_TOL = 1e-9

# Default penalty constants (starting points for the grid search)
DEFAULT_LAMBDA_SCALE = 5e-3   # lambda = scale * ||y||^2
DEFAULT_ALPHA = 7e-3
DEFAULT_BETA = 1e-2
DEFAULT_ETA = 1e-2

# Baseline (reweighted l1 + ISTA) defaults
DEFAULT_BASELINE_LAMBDA = 5e-2
DEFAULT_ISTA_ITERS = 20
DEFAULT_STEP_SCALE = 0.95
L2_WEIGHT_FLOOR = 1e-10

# Synthetic seismic experiment
DEFAULT_N = 784
DEFAULT_S = 41
DEFAULT_SIGMAS: List[float] = [0.01, 0.02, 0.03]
DEFAULT_REALIZATIONS = 30
DEFAULT_SEED = 0
DEFAULT_SPIKE_PROB = 0.05
DEFAULT_AMP_RANGE: Tuple[float, float] = (-1.0, 1.0)
AMPLITUDE_FLOOR_FRACTION = 0.1
DEFAULT_RICKER_PEAK_HZ = 24.0
DEFAULT_SAMPLE_INTERVAL_S = 0.004
DEFAULT_RADIUS_FACTOR = 1.05
INIT_KERNEL_STD_FRACTION = 1.0 / 8.0

# Inner-loop study
DEFAULT_J_VALUES: List[int] = [1, 5, 15, 40, 71, 120, 200]
DEFAULT_INNERLOOP_SIGMA = 0.03

# Grid search
DEFAULT_GRID_SIGMA = 0.03
DEFAULT_GRID_REALIZATIONS = 3
DEFAULT_SOOT_GRID: Dict[str, List[float]] = {
    "lambda_scale": [1e-3, 5e-3, 2e-2],
    "alpha": [1e-3, 7e-3, 5e-2],
    "beta": [1e-2],
    "eta": [1e-2],
}
DEFAULT_BASELINE_GRID: Dict[str, List[float]] = {
    "lambda_b": [1e-2, 5e-2, 2e-1],
}

METHOD_SOOT = "soot"
METHOD_BASELINE = "baseline"
METHODS: List[str] = [METHOD_SOOT, METHOD_BASELINE]

# Output schemas
METRICS_CSV_HEADER: List[str] = [
    "sigma", "method", "l2_signal", "l1_signal", "l2_kernel", "l1_kernel",
    "l2_obs", "l1_obs", "time_s", "failures",
]
RUNS_CSV_HEADER: List[str] = [
    "sigma", "method", "realization", "seed", "termination", "iterations",
    "l2_signal", "l1_signal", "l2_kernel", "l1_kernel", "l2_obs", "l1_obs",
    "raw_l2_signal", "raw_l1_signal", "raw_l2_kernel", "raw_l1_kernel", "time_s",
]
TRACE_CSV_HEADER: List[str] = ["k", "F", "x_delta", "h_delta", "wall_time_s", "nu_low", "nu_high"]
INNERLOOP_CSV_HEADER: List[str] = ["J", "mean_time_s", "std_time_s", "mean_l1_err"]
TIME_COLUMNS = {"time_s", "wall_time_s", "mean_time_s", "std_time_s"}

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER_FAILURE = 2
EXIT_IO_ERROR = 3
