"""
SOOT penalty - smoothed l1 / l2 norms, the log-ratio penalty phi, the smooth
objective f = rho + phi, its partial gradients and the quadratic majorant
metrics A1 (diagonal, for x) and A2 (scalar, for h).
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from models import SootParams
from .signal_core import (
    adjoint_convolve_wrt_h,
    adjoint_convolve_wrt_x,
    as_signal,
    convolve,
    kernel_op_norm_sq_bound,
    op_norm_sq_bound,
)
from .errors import PreconditionError


@dataclass(frozen=True)
class DiagMetric:
    """Positive diagonal majorant matrix together with its analytic bounds"""
    diag: np.ndarray
    nu_low: float
    nu_high: float

    def __post_init__(self):
        if not self.nu_low > 0:
            raise PreconditionError(f"metric lower bound must be positive, got {self.nu_low}")
        if np.any(self.diag <= 0):
            raise PreconditionError("metric diagonal has non-positive entries")

    def scaled(self, factor: float) -> "DiagMetric":
        return DiagMetric(self.diag * factor, self.nu_low * factor, self.nu_high * factor)

    def within_bounds(self, rtol: float = 1e-12) -> bool:
        low = self.nu_low * (1.0 - rtol)
        high = self.nu_high * (1.0 + rtol)
        return bool(np.all(self.diag >= low) and np.all(self.diag <= high))


# ---------------------------------------------------------------------------
# Smoothed norms and the penalty
# ---------------------------------------------------------------------------

def l1_smooth(x, alpha: float) -> float:
    """sum_n sqrt(x_n^2 + alpha^2) - alpha, in the cancellation-free form"""
    x = np.asarray(x, dtype=np.float64)
    if alpha < 0:
        raise PreconditionError(f"alpha must be nonnegative, got {alpha}")
    root = np.hypot(x, alpha)
    denom = root + alpha
    terms = np.divide(x * x, denom, out=np.zeros_like(x), where=denom > 0)
    return float(np.sum(terms))


def l2_smooth(x, eta: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    if eta < 0:
        raise PreconditionError(f"eta must be nonnegative, got {eta}")
    return float(np.sqrt(np.dot(x, x) + eta * eta))


def phi1(x, p: SootParams) -> float:
    return p.lam * float(np.log(l1_smooth(x, p.alpha) + p.beta))


def phi2(x, p: SootParams) -> float:
    return -p.lam * float(np.log(l2_smooth(x, p.eta)))


def phi(x, p: SootParams) -> float:
    """lambda * log((l1_alpha(x) + beta) / l2_eta(x))"""
    return p.lam * float(np.log((l1_smooth(x, p.alpha) + p.beta) / l2_smooth(x, p.eta)))


def grad_phi1(x, p: SootParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    tau = l1_smooth(x, p.alpha) + p.beta
    return (p.lam / tau) * x / np.hypot(x, p.alpha)


def grad_phi2(x, p: SootParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return -p.lam * x / (np.dot(x, x) + p.eta * p.eta)


def grad_phi(x, p: SootParams) -> np.ndarray:
    return grad_phi1(x, p) + grad_phi2(x, p)


def lipschitz_phi2_bound(p: SootParams) -> float:
    """Lipschitz constant 9 lambda / (8 eta^2) of grad phi2, the peak of chi(u)"""
    return 9.0 * p.lam / (8.0 * p.eta * p.eta)


def chi(u: float, p: SootParams) -> float:
    """Triangle-inequality bound on ||Hess phi2(x)|| as a function of u = ||x||"""
    u2 = u * u
    return p.lam * (3.0 * u2 + p.eta ** 2) / (u2 + p.eta ** 2) ** 2


# ---------------------------------------------------------------------------
# Smooth objective f = rho + phi and its partial gradients
# ---------------------------------------------------------------------------

def data_fidelity(x, h, y) -> float:
    """rho(x, h) = 1/2 ||h * x - y||^2"""
    residual = convolve(h, x) - as_signal(y, "y")
    return 0.5 * float(np.dot(residual, residual))


def smooth_objective(x, h, y, p: SootParams) -> float:
    return data_fidelity(x, h, y) + phi(x, p)


def grad1_f(x, h, y, p: SootParams) -> np.ndarray:
    """H^T (H x - y) + grad phi(x)"""
    residual = convolve(h, x) - as_signal(y, "y")
    return adjoint_convolve_wrt_x(h, residual) + grad_phi(x, p)


def grad2_f(x, h, y) -> np.ndarray:
    """X^T (X h - y); phi does not depend on h"""
    h = np.asarray(h, dtype=np.float64)
    residual = convolve(h, x) - as_signal(y, "y")
    return adjoint_convolve_wrt_h(x, residual, h.size)


# ---------------------------------------------------------------------------
# Majorant metrics
# ---------------------------------------------------------------------------

def metric_A1(x, h, p: SootParams, l1_h: Optional[float] = None) -> DiagMetric:
    """
    Diagonal majorant of f(., h) at x:

        d_n = L1(h) + 9 lambda / (8 eta^2) + lambda / ((l1_alpha(x) + beta) sqrt(x_n^2 + alpha^2))

    L1(h) can be passed in when it was already computed for this h.
    """
    x = np.asarray(x, dtype=np.float64)
    if l1_h is None:
        l1_h = op_norm_sq_bound(h, x.size)
    mu = lipschitz_phi2_bound(p)
    tau = l1_smooth(x, p.alpha) + p.beta
    correction = p.lam / (tau * np.hypot(x, p.alpha))
    diag = (l1_h + mu) + correction
    return DiagMetric(diag=diag, nu_low=mu, nu_high=l1_h + mu + p.lam / (p.beta * p.alpha))


def scalar_metric_A1(h, p: SootParams, n: int, l1_h: Optional[float] = None) -> DiagMetric:
    """A1 replaced by its upper bound (L1(h) + 9 lambda/(8 eta^2) + lambda/(beta alpha)) I"""
    if l1_h is None:
        l1_h = op_norm_sq_bound(h, n)
    value = l1_h + lipschitz_phi2_bound(p) + p.lam / (p.beta * p.alpha)
    return DiagMetric(diag=np.full(n, value), nu_low=lipschitz_phi2_bound(p), nu_high=value)


def metric_A2(x, kernel_length: int, floor: float = 0.0) -> float:
    """
    Scalar majorant L2(x) of f(x, .): Lipschitz constant of h -> X^T (X h - y).

    x = 0 gives 0; pass floor (e.g. METRIC_FLOOR) to keep it invertible.
    """
    return max(kernel_op_norm_sq_bound(x, kernel_length), floor)


def majorant_gap(
    func: Callable[[np.ndarray], float],
    grad: np.ndarray,
    curvature: np.ndarray,
    z: np.ndarray,
    z_new: np.ndarray,
) -> float:
    """q(z_new, z) - func(z_new) for q(z', z) = func(z) + (z'-z)^T grad + 1/2 ||z'-z||_U^2, U = diag(curvature)"""
    d = np.asarray(z_new, dtype=np.float64) - np.asarray(z, dtype=np.float64)
    q = func(z) + float(np.dot(d, grad)) + 0.5 * float(np.dot(d * curvature, d))
    return q - func(z_new)
