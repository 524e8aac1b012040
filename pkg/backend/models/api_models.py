from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from constants import DEFAULT_N, DEFAULT_S, METHOD_SOOT


class GenerateRequest(BaseModel):
    n: int = Field(default=DEFAULT_N, ge=1)
    s: int = Field(default=DEFAULT_S, ge=1)
    sigma: float = Field(default=0.01, ge=0)
    seed: int = Field(default=0, ge=0)
    realization: int = Field(default=0, ge=0)
    spike_prob: Optional[float] = Field(default=None, gt=0, lt=1)
    amp_range: Optional[Tuple[float, float]] = None


class GenerateResponse(BaseModel):
    seed: int
    noise_seed: List[int]
    x_true: List[float]
    h_true: List[float]
    y: List[float]
    kernel_bounds: Dict[str, float]


class SolveRequest(BaseModel):
    """Solve a generated instance, or an uploaded observation when y is given"""
    method: Literal["soot", "baseline"] = METHOD_SOOT
    n: int = Field(default=DEFAULT_N, ge=1)
    s: int = Field(default=DEFAULT_S, ge=1)
    sigma: float = Field(default=0.01, ge=0)
    seed: int = Field(default=0, ge=0)
    realization: int = Field(default=0, ge=0)

    # Uploaded data; constraints are read from kernel_reference (default: Ricker of length s)
    y: Optional[List[float]] = None
    kernel_reference: Optional[List[float]] = None

    lam: Optional[float] = Field(default=None, gt=0, alias="lambda")
    lambda_scale: Optional[float] = Field(default=None, gt=0)
    alpha: Optional[float] = Field(default=None, gt=0)
    beta: Optional[float] = Field(default=None, gt=0)
    eta: Optional[float] = Field(default=None, gt=0)
    inner_x: Optional[int] = Field(default=None, ge=1)
    inner_h: Optional[int] = Field(default=None, ge=1)
    max_outer: Optional[int] = Field(default=None, ge=1)
    lambda_b: Optional[float] = Field(default=None, ge=0)
    include_trace: bool = False

    model_config = ConfigDict(populate_by_name=True)

    def config_overrides(self) -> Dict[str, object]:
        """ExperimentConfig keyword arguments; None keeps the configured value"""
        return {
            "n": len(self.y) if self.y is not None else self.n,
            "s": len(self.kernel_reference) if self.kernel_reference is not None else self.s,
            "sigma_list": [self.sigma],
            "seed": self.seed,
            "soot_lambda": self.lam,
            "soot_lambda_scale": self.lambda_scale,
            "soot_alpha": self.alpha,
            "soot_beta": self.beta,
            "soot_eta": self.eta,
            "inner_x": self.inner_x,
            "inner_h": self.inner_h,
            "max_outer": self.max_outer,
            "baseline_lambda": self.lambda_b,
        }


class SolveResponse(BaseModel):
    method: str
    termination: str
    iterations: int
    final_F: Optional[float] = None
    wall_time_s: float
    x_hat: List[float]
    h_hat: List[float]
    metrics: Optional[Dict[str, float]] = None
    trace: Optional[List[Dict[str, Optional[float]]]] = None
    id: Optional[int] = None  # Registry ID, when recorded
