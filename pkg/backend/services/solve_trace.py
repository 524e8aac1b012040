"""
Iteration records shared by the SOOT solver and the baseline
"""
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Dict, List, Optional

import numpy as np


class Termination(str, Enum):
    CONVERGED = "converged"
    MAX_OUTER = "max_outer"
    DESCENT_VIOLATION = "descent_violation"
    SURROGATE_INCREASE = "surrogate_increase"

    @property
    def failed(self) -> bool:
        return self in (Termination.DESCENT_VIOLATION, Termination.SURROGATE_INCREASE)


@dataclass
class TraceRow:
    """One outer iteration; k = 0 is the initial point"""
    k: int
    F: float
    x_delta: float
    h_delta: float
    wall_time_s: float
    nu_low: float
    nu_high: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass
class SolveTrace:
    rows: List[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def f_values(self) -> np.ndarray:
        return np.array([row.F for row in self.rows])

    def is_nonincreasing(self, tol: float = 1e-9) -> bool:
        values = self.f_values
        return bool(np.all(np.diff(values) <= tol)) if values.size > 1 else True

    def max_increase(self) -> float:
        values = self.f_values
        return float(np.max(np.diff(values))) if values.size > 1 else 0.0


@dataclass
class SolveResult:
    x_hat: np.ndarray
    h_hat: np.ndarray
    trace: SolveTrace
    termination: Termination
    method: str = "soot"
    iterations: int = 0
    message: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.termination == Termination.CONVERGED

    @property
    def failed(self) -> bool:
        return self.termination.failed

    def summary(self) -> Dict[str, object]:
        last = self.trace.rows[-1] if self.trace.rows else None
        return {
            "method": self.method,
            "termination": self.termination.value,
            "iterations": self.iterations,
            "final_F": last.F if last else None,
            "final_x_delta": last.x_delta if last else None,
            "wall_time_s": last.wall_time_s if last else 0.0,
        }
