# Services package for the SOOT deconvolution toolkit
from .baseline_solver import baseline_solve, ista_x_phase, soft_threshold
from .errors import (
    ConfigurationError,
    DataFormatError,
    DeconvolutionError,
    PreconditionError,
    ProjectionConvergenceError,
)
from .experiment_runner import grid_search, run_innerloop_study, run_table
from .prox_geometry import project_box_ball, prox_box_diag_metric, prox_kernel_scalar_metric
from .result_saver import ResultSaver
from .seismic_bench import make_instance, ricker_wavelet
from .signal_core import ConvOperator, convolve, op_norm_sq_bound
from .solve_trace import SolveResult, SolveTrace, Termination
from .soot_solver import soot_solve

__all__ = [
    'ConfigurationError',
    'ConvOperator',
    'DataFormatError',
    'DeconvolutionError',
    'PreconditionError',
    'ProjectionConvergenceError',
    'ResultSaver',
    'SolveResult',
    'SolveTrace',
    'Termination',
    'baseline_solve',
    'convolve',
    'grid_search',
    'ista_x_phase',
    'make_instance',
    'op_norm_sq_bound',
    'project_box_ball',
    'prox_box_diag_metric',
    'prox_kernel_scalar_metric',
    'ricker_wavelet',
    'run_innerloop_study',
    'run_table',
    'soft_threshold',
    'soot_solve',
]
