from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy.interpolate import CubicSpline


@dataclass
class PathSpline:
    """Cubic x(u), y(u) over the chord-length parameter u"""
    knots: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    sx: CubicSpline = field(repr=False)
    sy: CubicSpline = field(repr=False)
    length: float = 0.0
    # cumulative arc length at `u` (knots)
    arc_at_knots: np.ndarray = field(default=None, repr=False)
    bc_type: str = "natural"

    @property
    def u_max(self) -> float:
        return float(self.u[-1])

    def position(self, u):
        return self.sx(u), self.sy(u)


@dataclass
class VelocityProfile:
    s: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)
    v_max: float = 1.5
    omega_max: float = 1.0
    a_max: float = 1.0
    v_start: float = 0.0
    v_end: float = 0.0

    @property
    def speed_cap(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            turn_cap = np.where(self.curvature > 0, self.omega_max / np.abs(self.curvature), np.inf)
        return np.minimum(self.v_max, turn_cap)

    def cumulative_time(self) -> np.ndarray:
        ds = np.diff(self.s)
        vs = self.v[:-1] + self.v[1:]
        with np.errstate(divide="ignore"):
            dt = np.where(vs > 0, 2.0 * ds / vs, np.inf)
        return np.concatenate(([0.0], np.cumsum(dt)))

    def scaled(self, factor: float) -> "VelocityProfile":
        return VelocityProfile(self.s, self.v * factor, self.curvature, self.v_max,
                               self.omega_max, self.a_max, self.v_start, self.v_end)


@dataclass
class PathMetrics:
    S: float
    T: float
    K_max: float
    K_mean: float
    min_clearance: float = float("nan")
    mean_clearance: float = float("nan")

    def to_row(self) -> Dict[str, float]:
        return {
            "S": self.S,
            "T": self.T,
            "K_max": self.K_max,
            "K_mean": self.K_mean,
            "min_clearance": self.min_clearance,
            "mean_clearance": self.mean_clearance,
        }
