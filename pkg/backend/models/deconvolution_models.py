"""
Typed parameter and configuration models for the deconvolution services
"""
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from constants import (
    AMPLITUDE_FLOOR_FRACTION,
    DEFAULT_ALPHA,
    DEFAULT_AMP_RANGE,
    DEFAULT_BASELINE_GRID,
    DEFAULT_BASELINE_LAMBDA,
    DEFAULT_BETA,
    DEFAULT_ETA,
    DEFAULT_GAMMA_HIGH,
    DEFAULT_GAMMA_LOW,
    DEFAULT_GRID_REALIZATIONS,
    DEFAULT_GRID_SIGMA,
    DEFAULT_INNER_H,
    DEFAULT_INNER_X,
    DEFAULT_INNERLOOP_SIGMA,
    DEFAULT_ISTA_ITERS,
    DEFAULT_J_VALUES,
    DEFAULT_LAMBDA_SCALE,
    DEFAULT_MAX_OUTER,
    DEFAULT_N,
    DEFAULT_RADIUS_FACTOR,
    DEFAULT_REALIZATIONS,
    DEFAULT_RICKER_PEAK_HZ,
    DEFAULT_S,
    DEFAULT_SAMPLE_INTERVAL_S,
    DEFAULT_SEED,
    DEFAULT_SIGMAS,
    DEFAULT_SOOT_GRID,
    DEFAULT_SPIKE_PROB,
    DEFAULT_STEP,
    DEFAULT_STEP_SCALE,
    DEFAULT_STOP_TOL,
    DESCENT_TOL,
    METRIC_FLOOR,
)


class SootParams(BaseModel):
    """Penalty constants of phi(x) = lambda * log((l1_alpha(x) + beta) / l2_eta(x))"""
    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lam: float = Field(gt=0, alias="lambda")
    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    eta: float = Field(gt=0)


class BoxConstraint(BaseModel):
    """Per-coordinate bounds [lo, hi] for the signal"""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def _check_order(self):
        if not self.lo <= self.hi:
            raise ValueError(f"box lower bound {self.lo} exceeds upper bound {self.hi}")
        return self

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lo - tol) and np.all(z <= self.hi + tol))


class KernelConstraint(BaseModel):
    """C = {h in [lo, hi]^S : ||h|| <= radius}"""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float
    radius: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_feasible(self):
        if not self.lo <= self.hi:
            raise ValueError(f"kernel lower bound {self.lo} exceeds upper bound {self.hi}")
        if not self.is_nonempty(1):
            raise ValueError("kernel constraint set is empty")
        return self

    def closest_box_value(self) -> float:
        """Coordinate of the box point nearest to the origin"""
        return min(max(0.0, self.lo), self.hi)

    def is_nonempty(self, size: int) -> bool:
        return abs(self.closest_box_value()) * math.sqrt(size) <= self.radius

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, dtype=float)
        in_box = np.all(z >= self.lo - tol) and np.all(z <= self.hi + tol)
        return bool(in_box and np.linalg.norm(z) <= self.radius + tol)


class SolverConfig(BaseModel):
    """Settings of the block-alternating variable-metric forward-backward solver"""
    model_config = ConfigDict(frozen=True)

    inner_x: int = Field(default=DEFAULT_INNER_X, ge=1)
    inner_h: int = Field(default=DEFAULT_INNER_H, ge=1)
    step_x: float = DEFAULT_STEP
    step_h: float = DEFAULT_STEP
    stop_tol: float = Field(default=DEFAULT_STOP_TOL, ge=0)
    max_outer: int = Field(default=DEFAULT_MAX_OUTER, ge=1)
    check_descent: bool = True
    gamma_low: float = Field(default=DEFAULT_GAMMA_LOW, gt=0)
    gamma_high: float = Field(default=DEFAULT_GAMMA_HIGH, gt=0)
    descent_tol: float = Field(default=DESCENT_TOL, ge=0)
    metric_floor: float = Field(default=METRIC_FLOOR, gt=0)
    # Replace A1 by its scalar upper bound times the identity (PALM when J = I = 1)
    scalar_metric: bool = False
    # Reuse the previous power-iteration vector when refreshing L1(h) and L2(x)
    warm_start_norms: bool = True

    @model_validator(mode="after")
    def _check_steps(self):
        upper = 2.0 - self.gamma_high
        if self.gamma_low > upper:
            raise ValueError(f"empty step interval [{self.gamma_low}, {upper}]")
        for name in ("step_x", "step_h"):
            step = getattr(self, name)
            if not self.gamma_low <= step <= upper:
                raise ValueError(f"{name}={step} outside [{self.gamma_low}, {upper}]")
        return self


class BaselineConfig(BaseModel):
    """Settings of the reweighted-l1 alternating baseline"""
    model_config = ConfigDict(frozen=True)

    lambda_b: float = Field(default=DEFAULT_BASELINE_LAMBDA, ge=0)
    ista_iters: int = Field(default=DEFAULT_ISTA_ITERS, ge=1)
    outer_iters: int = Field(default=DEFAULT_MAX_OUTER, ge=1)
    stop_tol: float = Field(default=DEFAULT_STOP_TOL, ge=0)
    step_scale: float = Field(default=DEFAULT_STEP_SCALE, gt=0, le=1)
    metric_floor: float = Field(default=METRIC_FLOOR, gt=0)
    fix_kernel: bool = False
    # Stop with surrogate_increase when an ISTA phase raises its surrogate by more than descent_tol
    check_descent: bool = True
    descent_tol: float = Field(default=DESCENT_TOL, ge=0)


class ExperimentConfig(BaseModel):
    """Fully resolved configuration of a synthetic seismic study"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(default=DEFAULT_N, ge=1)
    s: int = Field(default=DEFAULT_S, ge=1)
    sigma_list: List[float] = Field(default_factory=lambda: list(DEFAULT_SIGMAS))
    realizations: int = Field(default=DEFAULT_REALIZATIONS, ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    spike_prob: float = Field(default=DEFAULT_SPIKE_PROB, gt=0, lt=1)
    amp_range: Tuple[float, float] = DEFAULT_AMP_RANGE
    ricker_peak_hz: float = Field(default=DEFAULT_RICKER_PEAK_HZ, gt=0)
    sample_interval_s: float = Field(default=DEFAULT_SAMPLE_INTERVAL_S, gt=0)
    radius_factor: float = Field(default=DEFAULT_RADIUS_FACTOR, gt=0)

    # SOOT
    soot_lambda: Optional[float] = Field(default=None, gt=0)
    soot_lambda_scale: float = Field(default=DEFAULT_LAMBDA_SCALE, gt=0)
    soot_alpha: float = Field(default=DEFAULT_ALPHA, gt=0)
    soot_beta: float = Field(default=DEFAULT_BETA, gt=0)
    soot_eta: float = Field(default=DEFAULT_ETA, gt=0)
    inner_x: int = Field(default=DEFAULT_INNER_X, ge=1)
    inner_h: int = Field(default=DEFAULT_INNER_H, ge=1)
    step_x: float = DEFAULT_STEP
    step_h: float = DEFAULT_STEP
    stop_tol: float = Field(default=DEFAULT_STOP_TOL, ge=0)
    max_outer: int = Field(default=DEFAULT_MAX_OUTER, ge=1)

    # Baseline
    baseline_lambda: float = Field(default=DEFAULT_BASELINE_LAMBDA, ge=0)
    baseline_ista_iters: int = Field(default=DEFAULT_ISTA_ITERS, ge=1)
    baseline_step_scale: float = Field(default=DEFAULT_STEP_SCALE, gt=0, le=1)

    # Studies
    innerloop_sigma: float = Field(default=DEFAULT_INNERLOOP_SIGMA, ge=0)
    j_values: List[int] = Field(default_factory=lambda: list(DEFAULT_J_VALUES))
    grid_sigma: float = Field(default=DEFAULT_GRID_SIGMA, ge=0)
    grid_realizations: int = Field(default=DEFAULT_GRID_REALIZATIONS, ge=1)
    soot_grid: Dict[str, List[float]] = Field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_SOOT_GRID.items()})
    baseline_grid: Dict[str, List[float]] = Field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_BASELINE_GRID.items()})

    # Execution
    workers: int = Field(default=1, ge=1)
    verbose: bool = False
    align_scale: bool = False

    @model_validator(mode="after")
    def _check_consistency(self):
        if self.s > self.n:
            raise ValueError(f"kernel size s={self.s} exceeds signal length n={self.n}")
        if any(sigma < 0 for sigma in self.sigma_list):
            raise ValueError("noise levels must be nonnegative")
        lo, hi = self.amp_range
        if not lo < hi:
            raise ValueError(f"invalid amplitude range {self.amp_range}")
        floor = AMPLITUDE_FLOOR_FRACTION * max(abs(lo), abs(hi))
        if hi < floor and lo > -floor:
            raise ValueError(f"amplitude range {self.amp_range} leaves no room above the amplitude floor")
        if any(j < 1 for j in self.j_values):
            raise ValueError("inner-loop counts must be >= 1")
        return self

    def solver_config(self, inner_x: Optional[int] = None) -> SolverConfig:
        return SolverConfig(
            inner_x=inner_x or self.inner_x,
            inner_h=self.inner_h,
            step_x=self.step_x,
            step_h=self.step_h,
            stop_tol=self.stop_tol,
            max_outer=self.max_outer,
        )

    def baseline_config(self, lambda_b: Optional[float] = None) -> BaselineConfig:
        return BaselineConfig(
            lambda_b=self.baseline_lambda if lambda_b is None else lambda_b,
            ista_iters=self.baseline_ista_iters,
            outer_iters=self.max_outer,
            stop_tol=self.stop_tol,
            step_scale=self.baseline_step_scale,
        )

    def soot_params_for(self, observation_energy: float, **overrides) -> SootParams:
        """Resolve SootParams; lambda = scale * ||y||^2 unless an absolute value is set"""
        if "lambda_scale" in overrides:
            lam = overrides["lambda_scale"] * observation_energy
        elif self.soot_lambda is not None:
            lam = self.soot_lambda
        else:
            lam = self.soot_lambda_scale * observation_energy
        return SootParams(
            lam=lam,
            alpha=overrides.get("alpha", self.soot_alpha),
            beta=overrides.get("beta", self.soot_beta),
            eta=overrides.get("eta", self.soot_eta),
        )
