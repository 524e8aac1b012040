"""
Signal core - 1-D signals, zero-padded "same" convolution, its adjoints
and operator-norm bounds used for the Lipschitz constants of the data term.

Convention: for a kernel h of length S and a signal x of length N (S <= N),

    convolve(h, x)_n = sum_s h_s * x_{n - s + c},   c = S // 2,

with x treated as zero outside [0, N). Output length is N.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import fftconvolve

from constants import (
    NORM_SAFETY_FACTOR,
    POWER_ITERATION_MAX_ITER,
    POWER_ITERATION_SEED,
    POWER_ITERATION_TOL,
)
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, Sequence[float]]
LinearMap = Callable[[np.ndarray], np.ndarray]


def as_signal(values: ArrayLike, name: str = "signal") -> np.ndarray:
    """Validate and return a finite, non-empty float64 1-D array"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ConfigurationError(f"{name} must contain at least one sample")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains NaN or Inf values")
    return arr


def as_kernel(values: ArrayLike, signal_length: Optional[int] = None, name: str = "kernel") -> np.ndarray:
    """Validate a kernel; when signal_length is given, enforce 1 <= S <= N"""
    arr = as_signal(values, name)
    if signal_length is not None and arr.size > signal_length:
        raise ConfigurationError(
            f"{name} length {arr.size} exceeds signal length {signal_length}"
        )
    return arr


def center_offset(kernel_length: int) -> int:
    return kernel_length // 2


def convolve(h: ArrayLike, x: ArrayLike) -> np.ndarray:
    """Zero-padded "same" linear convolution h * x (direct summation)"""
    x = as_signal(x, "x")
    h = as_kernel(h, x.size, "h")
    c = center_offset(h.size)
    full = np.convolve(x, h)
    return full[c:c + x.size]


def convolve_fft(h: ArrayLike, x: ArrayLike) -> np.ndarray:
    """Frequency-domain path; agrees with convolve() up to FFT round-off"""
    x = as_signal(x, "x")
    h = as_kernel(h, x.size, "h")
    c = center_offset(h.size)
    full = fftconvolve(x, h, mode="full")
    return full[c:c + x.size]


def adjoint_convolve_wrt_x(h: ArrayLike, r: ArrayLike) -> np.ndarray:
    """H^T r, where H is the matrix of x -> convolve(h, x)"""
    r = as_signal(r, "r")
    h = as_kernel(h, r.size, "h")
    s = h.size
    c = center_offset(s)
    full = np.convolve(r, h[::-1])
    return full[s - 1 - c:s - 1 - c + r.size]


def adjoint_convolve_wrt_h(x: ArrayLike, r: ArrayLike, kernel_length: int) -> np.ndarray:
    """X^T r, where X is the matrix of h -> convolve(h, x) on length-S kernels"""
    x = as_signal(x, "x")
    r = as_signal(r, "r")
    if r.size != x.size:
        raise ConfigurationError(f"residual length {r.size} does not match signal length {x.size}")
    if not 1 <= kernel_length <= x.size:
        raise ConfigurationError(f"kernel length {kernel_length} outside [1, {x.size}]")
    n = x.size
    c = center_offset(kernel_length)
    full = np.convolve(r, x[::-1])
    return full[n - 1 - c:n - 1 - c + kernel_length]


def convolution_matrix(h: ArrayLike, n: int) -> np.ndarray:
    """Dense N x N matrix of x -> convolve(h, x), built column by column"""
    h = as_kernel(h, n, "h")
    eye = np.eye(n)
    return np.column_stack([convolve(h, eye[:, j]) for j in range(n)])


def kernel_convolution_matrix(x: ArrayLike, kernel_length: int) -> np.ndarray:
    """Dense N x S matrix of h -> convolve(h, x)"""
    x = as_signal(x, "x")
    eye = np.eye(kernel_length)
    return np.column_stack([convolve(eye[:, j], x) for j in range(kernel_length)])


def power_iteration(
    apply: LinearMap,
    adjoint: LinearMap,
    size: int,
    tol: float = POWER_ITERATION_TOL,
    max_iter: int = POWER_ITERATION_MAX_ITER,
    v0: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """
    Estimate the largest eigenvalue of A^T A by power iteration.

    Returns the Rayleigh quotient ||A v||^2 (a lower estimate of sigma_max^2)
    and the final unit vector, which can warm-start the next call.
    """
    if v0 is None or v0.size != size or not np.any(v0):
        v = np.random.default_rng(POWER_ITERATION_SEED).standard_normal(size)
    else:
        v = np.array(v0, dtype=np.float64)
    v /= np.linalg.norm(v)

    value = 0.0
    for iteration in range(1, max_iter + 1):
        w = adjoint(apply(v))
        new_value = float(np.dot(v, w))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0, v
        v = w / norm_w
        if value > 0.0 and abs(new_value - value) <= tol * value:
            value = new_value
            break
        value = new_value
    else:
        logger.debug(f"   power iteration hit max_iter={max_iter} (estimate {value:.6g})")

    # Rayleigh quotient of the final vector is never below the previous one
    av = apply(v)
    return max(value, float(np.dot(av, av))), v


def op_norm_sq_bound(
    k: ArrayLike,
    out_len: int,
    v0: Optional[np.ndarray] = None,
    return_vector: bool = False,
):
    """
    Upper bound on ||H||^2 for H the matrix of x -> convolve(k, x), x of length out_len.

    Power iteration on H^T H to relative tolerance 1e-6 (at most 500 steps),
    times the 1.01 safety factor. An all-zero kernel gives 0.
    """
    k = as_kernel(k, out_len, "kernel")
    if not np.any(k):
        return (0.0, None) if return_vector else 0.0
    estimate, v = power_iteration(
        lambda z: convolve(k, z),
        lambda r: adjoint_convolve_wrt_x(k, r),
        out_len,
        v0=v0,
    )
    bound = max(0.0, NORM_SAFETY_FACTOR * estimate)
    return (bound, v) if return_vector else bound


def kernel_op_norm_sq_bound(
    x: ArrayLike,
    kernel_length: int,
    v0: Optional[np.ndarray] = None,
    return_vector: bool = False,
):
    """Same bound for X, the operator h -> convolve(h, x) acting on length-S kernels"""
    x = as_signal(x, "x")
    if not np.any(x):
        return (0.0, None) if return_vector else 0.0
    estimate, v = power_iteration(
        lambda h: convolve(h, x),
        lambda r: adjoint_convolve_wrt_h(x, r, kernel_length),
        kernel_length,
        v0=v0,
    )
    bound = max(0.0, NORM_SAFETY_FACTOR * estimate)
    return (bound, v) if return_vector else bound


@dataclass(frozen=True)
class ConvOperator:
    """Convolution by a fixed kernel on signals of a fixed length"""
    kernel: np.ndarray
    signal_length: int
    boundary: str = "zero-padded-same"

    def __post_init__(self):
        object.__setattr__(self, "kernel", as_kernel(self.kernel, self.signal_length))
        if self.boundary != "zero-padded-same":
            raise ConfigurationError(f"unsupported boundary mode '{self.boundary}'")

    def apply(self, x: ArrayLike) -> np.ndarray:
        x = as_signal(x, "x")
        if x.size != self.signal_length:
            raise ConfigurationError(f"expected signal of length {self.signal_length}, got {x.size}")
        return convolve(self.kernel, x)

    def adjoint(self, r: ArrayLike) -> np.ndarray:
        r = as_signal(r, "r")
        if r.size != self.signal_length:
            raise ConfigurationError(f"expected residual of length {self.signal_length}, got {r.size}")
        return adjoint_convolve_wrt_x(self.kernel, r)

    def matrix(self) -> np.ndarray:
        return convolution_matrix(self.kernel, self.signal_length)

    def norm_sq_bound(self) -> float:
        return op_norm_sq_bound(self.kernel, self.signal_length)
