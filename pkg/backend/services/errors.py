"""
Exception hierarchy shared by the deconvolution services
"""
from typing import Optional

import numpy as np


class DeconvolutionError(Exception):
    """Base class for every error raised by the deconvolution services"""


class ConfigurationError(DeconvolutionError):
    """Invalid lengths, non-finite values or out-of-range parameters"""


class PreconditionError(DeconvolutionError):
    """An operation was called outside its domain (e.g. infeasible initialization)"""


class DataFormatError(DeconvolutionError):
    """A signal, kernel or config file could not be parsed"""


class ProjectionConvergenceError(DeconvolutionError):
    """Dykstra's projection did not settle within its iteration budget"""

    def __init__(self, message: str, last_iterate: Optional[np.ndarray] = None, residual: float = float("nan")):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
