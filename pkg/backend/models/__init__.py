from .deconvolution_models import (
    SootParams,
    BoxConstraint,
    KernelConstraint,
    SolverConfig,
    BaselineConfig,
    ExperimentConfig,
)
from .api_models import GenerateRequest, GenerateResponse, SolveRequest, SolveResponse

__all__ = [
    "SootParams",
    "BoxConstraint",
    "KernelConstraint",
    "SolverConfig",
    "BaselineConfig",
    "ExperimentConfig",
    "GenerateRequest",
    "GenerateResponse",
    "SolveRequest",
    "SolveResponse",
]
