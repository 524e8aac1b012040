"""
SOOT solver - block-alternating variable-metric forward-backward iterations.

Each outer iteration runs J preconditioned gradient / box-prox steps on the
signal (diagonal metric A1, refreshed at every inner step) followed by I
gradient / box-ball projection steps on the kernel (scalar metric A2).
"""
import logging
import math
import time
from typing import Callable, Optional

import numpy as np

from constants import FEASIBILITY_TOL
from models import BoxConstraint, KernelConstraint, SolverConfig, SootParams
from .errors import ConfigurationError, PreconditionError
from .prox_geometry import prox_box_diag_metric, prox_kernel_scalar_metric
from .signal_core import as_kernel, as_signal, kernel_op_norm_sq_bound, op_norm_sq_bound
from .soot_penalty import (
    grad1_f,
    grad2_f,
    lipschitz_phi2_bound,
    metric_A1,
    scalar_metric_A1,
    smooth_objective,
)
from .solve_trace import SolveResult, SolveTrace, Termination, TraceRow

logger = logging.getLogger(__name__)

IterateCallback = Callable[[int, np.ndarray, np.ndarray], None]


def objective_F(
    x,
    h,
    y,
    p: SootParams,
    g1: BoxConstraint,
    g2: KernelConstraint,
    feasibility_tol: float = FEASIBILITY_TOL,
) -> float:
    """rho + phi on feasible (x, h), +inf otherwise"""
    if not g1.contains(x, feasibility_tol) or not g2.contains(h, feasibility_tol):
        return math.inf
    return smooth_objective(x, h, y, p)


def check_initialization(x: np.ndarray, h: np.ndarray, y: np.ndarray, g1: BoxConstraint, g2: KernelConstraint) -> None:
    if x.size != y.size:
        raise ConfigurationError(f"initial signal length {x.size} does not match observation length {y.size}")
    if not g1.contains(x, FEASIBILITY_TOL):
        raise PreconditionError("initial signal is outside the box constraint")
    if not g2.contains(h, FEASIBILITY_TOL):
        raise PreconditionError("initial kernel is outside the kernel constraint set")


def soot_solve(
    y,
    init_x,
    init_h,
    p: SootParams,
    g1: BoxConstraint,
    g2: KernelConstraint,
    cfg: Optional[SolverConfig] = None,
    callback: Optional[IterateCallback] = None,
) -> SolveResult:
    """
    Minimize F(x, h) = 1/2 ||h * x - y||^2 + phi(x) + i_box(x) + i_C(h).

    Stops when ||x^k - x^{k-1}|| <= stop_tol * sqrt(N) or after max_outer
    iterations. With check_descent on, an increase of F beyond descent_tol
    ends the run with a descent_violation termination. callback(k, x, h) is
    called after every outer iteration.
    """
    cfg = cfg or SolverConfig()
    y = as_signal(y, "y")
    x = as_signal(init_x, "init_x").copy()
    h = as_kernel(init_h, y.size, "init_h").copy()
    check_initialization(x, h, y, g1, g2)

    n, s = y.size, h.size
    threshold = cfg.stop_tol * math.sqrt(n)
    mu = lipschitz_phi2_bound(p)
    correction_bound = p.lam / (p.beta * p.alpha)

    logger.info(f"🎯 SOOT solve: N={n} S={s} J={cfg.inner_x} I={cfg.inner_h} "
                f"lambda={p.lam:.4g} alpha={p.alpha:.3g} beta={p.beta:.3g} eta={p.eta:.3g}")

    start = time.perf_counter()
    v_h = None
    v_x = None
    l1_h, v_h = op_norm_sq_bound(h, n, return_vector=True)

    trace = SolveTrace()
    f_current = objective_F(x, h, y, p, g1, g2)
    trace.append(TraceRow(0, f_current, 0.0, 0.0, 0.0, mu, l1_h + mu + correction_bound))

    termination = Termination.MAX_OUTER
    message = None
    k = 0
    for k in range(1, cfg.max_outer + 1):
        x_prev = x
        h_prev = h
        nu_low, nu_high = math.inf, 0.0

        for _ in range(cfg.inner_x):
            grad = grad1_f(x, h, y, p)
            if cfg.scalar_metric:
                metric = scalar_metric_A1(h, p, n, l1_h=l1_h)
            else:
                metric = metric_A1(x, h, p, l1_h=l1_h)
            if not metric.within_bounds():
                raise PreconditionError(
                    f"A1 diagonal left [{metric.nu_low:.6g}, {metric.nu_high:.6g}] at outer iteration {k}"
                )
            nu_low = min(nu_low, metric.nu_low)
            nu_high = max(nu_high, metric.nu_high)
            x_tilde = x - cfg.step_x * grad / metric.diag
            x = prox_box_diag_metric(x_tilde, g1, metric.scaled(1.0 / cfg.step_x))

        if cfg.warm_start_norms:
            l2_x, v_x = kernel_op_norm_sq_bound(x, s, v0=v_x, return_vector=True)
        else:
            l2_x = kernel_op_norm_sq_bound(x, s)
        l2_x = max(l2_x, cfg.metric_floor)

        for _ in range(cfg.inner_h):
            grad_h = grad2_f(x, h, y)
            h_tilde = h - cfg.step_h * grad_h / l2_x
            h = prox_kernel_scalar_metric(h_tilde, g2, l2_x / cfg.step_h)

        f_new = objective_F(x, h, y, p, g1, g2)
        x_delta = float(np.linalg.norm(x - x_prev))
        h_delta = float(np.linalg.norm(h - h_prev))
        trace.append(TraceRow(k, f_new, x_delta, h_delta, time.perf_counter() - start, nu_low, nu_high))

        if callback is not None:
            callback(k, x, h)

        if k % 100 == 0:
            logger.debug(f"   k={k} F={f_new:.10g} dx={x_delta:.3e} dh={h_delta:.3e}")

        if cfg.check_descent and f_new > f_current + cfg.descent_tol:
            message = f"F increased by {f_new - f_current:.3e} at outer iteration {k}"
            logger.warning(f"⚠️ Descent violation: {message}")
            termination = Termination.DESCENT_VIOLATION
            break
        f_current = f_new

        if x_delta <= threshold:
            termination = Termination.CONVERGED
            break

        if cfg.warm_start_norms:
            l1_h, v_h = op_norm_sq_bound(h, n, v0=v_h, return_vector=True)
        else:
            l1_h = op_norm_sq_bound(h, n)

    elapsed = time.perf_counter() - start
    if termination == Termination.MAX_OUTER:
        logger.warning(f"⚠️ SOOT reached max_outer={cfg.max_outer} (last dx={trace.rows[-1].x_delta:.3e})")
    logger.info(f"✅ SOOT finished: {termination.value} after {k} iterations, "
                f"F={trace.rows[-1].F:.8g}, {elapsed:.2f}s")

    return SolveResult(
        x_hat=x,
        h_hat=h,
        trace=trace,
        termination=termination,
        method="soot",
        iterations=k,
        message=message,
    )
