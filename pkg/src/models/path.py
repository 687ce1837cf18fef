from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp


class SolverStatus(Enum):
    SOLVED = "solved"
    MAX_ITERATIONS = "max_iterations"


@dataclass
class SmootherConfig:
    w_s: float = 10.0
    w_r: float = 1.0
    eps_abs: float = 1e-6
    max_iter: int = 4000
    rho: float = 1.0
    sigma: float = 1e-6
    alpha: float = 1.6
    adaptive_rho_interval: int = 25
    spacing: float = 0.1
    allow_zero_reference_weight: bool = False

    def __post_init__(self):
        if self.w_s <= 0:
            raise ValueError("w_s must be positive")
        if self.w_r < 0 or (self.w_r == 0 and not self.allow_zero_reference_weight):
            raise ValueError("w_r must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class ReferencePath:
    """Reference vertices (n x 2, meters) with clearance d_i and margin b_i"""
    vertices: np.ndarray
    clearances: np.ndarray
    margins: np.ndarray
    r_c: float

    @property
    def n(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def spacing(self) -> np.ndarray:
        return np.hypot(*np.diff(self.vertices, axis=0).T)

    @property
    def frozen(self) -> np.ndarray:
        return self.margins <= 0.0


@dataclass
class BoxQp:
    """min 1/2 x'Px + q'x  s.t.  lower <= x <= upper, x interleaved (x1, y1, x2, y2, ...)"""
    P: sp.csc_matrix = field(repr=False)
    q: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return int(self.q.shape[0])

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.P @ x) + self.q @ x)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.P @ x + self.q

    def projected_gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient with components pointing out of an active bound removed"""
        g = self.gradient(x)
        step = np.clip(x - g, self.lower, self.upper)
        return x - step


@dataclass
class QpSolution:
    x: np.ndarray
    status: SolverStatus
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    polished: bool = False
    solve_time: float = 0.0
    objective_history: List[float] = field(default_factory=list, repr=False)


@dataclass
class SmoothedPath:
    vertices: np.ndarray
    reference: ReferencePath = field(default=None, repr=False)
    status: SolverStatus = SolverStatus.SOLVED
    iterations: int = 0
    objective: float = 0.0
    reference_objective: float = 0.0
    solve_time: float = 0.0

    @property
    def n(self) -> int:
        return int(self.vertices.shape[0])

    def as_points(self) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in self.vertices]
