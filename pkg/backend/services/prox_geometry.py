"""
Proximity operators of the two constraint indicators:
box projection for the signal and box-ball projection for the kernel.
"""
import logging

import numpy as np

from constants import PROJECTION_MAX_ITER, PROJECTION_TOL
from models import BoxConstraint, KernelConstraint
from .errors import PreconditionError, ProjectionConvergenceError
from .soot_penalty import DiagMetric

logger = logging.getLogger(__name__)


def prox_box_diag_metric(z, box: BoxConstraint, metric: DiagMetric) -> np.ndarray:
    """
    prox of the box indicator under a positive diagonal metric.

    The weighted problem separates per coordinate and each 1-D projection is
    a clip, so the weights do not change the result.
    """
    if np.any(metric.diag <= 0):
        raise PreconditionError("box prox requires a positive diagonal metric")
    return np.clip(np.asarray(z, dtype=np.float64), box.lo, box.hi)


def project_ball(z, radius: float) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    norm = np.linalg.norm(z)
    if norm <= radius:
        return z.copy()
    return z * (radius / norm)


def project_box_ball(
    z,
    c: KernelConstraint,
    tol: float = PROJECTION_TOL,
    max_iter: int = PROJECTION_MAX_ITER,
) -> np.ndarray:
    """
    Euclidean projection onto {h in [lo, hi]^S : ||h|| <= radius}.

    Exact shortcuts cover the cases where z, its box projection or its ball
    projection already lies in the intersection; otherwise Dykstra's
    alternating projections run until successive iterates move less than tol.
    """
    z = np.asarray(z, dtype=np.float64)
    if not c.is_nonempty(z.size):
        raise PreconditionError(f"kernel constraint set is empty for S={z.size}")

    if c.contains(z):
        return z.copy()
    boxed = np.clip(z, c.lo, c.hi)
    if np.linalg.norm(boxed) <= c.radius:
        return boxed
    balled = project_ball(z, c.radius)
    if c.contains(balled):
        return balled

    x = z.copy()
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    residual = np.inf
    for sweep in range(1, max_iter + 1):
        y = np.clip(x + p, c.lo, c.hi)
        p = x + p - y
        x_new = project_ball(y + q, c.radius)
        q = y + q - x_new
        residual = float(np.linalg.norm(x_new - x))
        x = x_new
        if residual < tol:
            logger.debug(f"   Dykstra converged in {sweep} sweeps (move {residual:.3e})")
            return x

    logger.error(f"❌ Dykstra projection did not converge in {max_iter} sweeps (move {residual:.3e})")
    raise ProjectionConvergenceError(
        f"box-ball projection did not converge within {max_iter} sweeps",
        last_iterate=x,
        residual=residual,
    )


def prox_kernel_scalar_metric(z, c: KernelConstraint, scale: float, **kwargs) -> np.ndarray:
    """prox of the kernel indicator under scale * I, i.e. the Euclidean projection"""
    if not scale > 0:
        raise PreconditionError(f"kernel metric must be a positive scalar, got {scale}")
    return project_box_ball(z, c, **kwargs)
