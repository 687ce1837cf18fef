#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from ..models import (
    CurvatureSingularityError,
    DegenerateKnotError,
    GvdMap,
    PathMetrics,
    PathSpline,
    SmoothedPath,
    SpeedLimits,
    StalledProfileError,
    VelocityInfeasibleError,
    VelocityProfile,
    world_to_cell,
)
from .gvd import clearance_at

logger = logging.getLogger(__name__)

# parameter samples per spline segment for the arc-length table
_SAMPLES_PER_SEGMENT = 32


def fit_spline(path: Union[SmoothedPath, np.ndarray], bc_type: str = "natural") -> PathSpline:
    """
    弦長パラメータによる3次スプライン補間

    弧長は各区間を適応求積で積分する。
    """
    knots = np.asarray(path.vertices if isinstance(path, SmoothedPath) else path, dtype=float)
    if knots.ndim != 2 or knots.shape[0] < 3:
        raise DegenerateKnotError("At least 3 knots are required")
    chords = np.hypot(*np.diff(knots, axis=0).T)
    if np.any(chords <= 1e-12):
        i = int(np.flatnonzero(chords <= 1e-12)[0])
        raise DegenerateKnotError(f"Knots {i} and {i + 1} coincide")

    u = np.concatenate(([0.0], np.cumsum(chords)))
    sx = CubicSpline(u, knots[:, 0], bc_type=bc_type)
    sy = CubicSpline(u, knots[:, 1], bc_type=bc_type)

    def speed(t: float) -> float:
        return math.hypot(float(sx(t, 1)), float(sy(t, 1)))

    pieces = [integrate.quad(speed, a, b, epsabs=1e-9, epsrel=1e-9)[0] for a, b in zip(u, u[1:])]
    arc = np.concatenate(([0.0], np.cumsum(pieces)))
    return PathSpline(knots=knots, u=u, sx=sx, sy=sy, length=float(arc[-1]),
                      arc_at_knots=arc, bc_type=bc_type)


def curvature_at(spline: PathSpline, u: float) -> float:
    """|x'y'' − y'x''| / (x'² + y'²)^(3/2)"""
    return float(curvature_array(spline, np.array([u]))[0])


def curvature_array(spline: PathSpline, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    dx, dy = spline.sx(u, 1), spline.sy(u, 1)
    ddx, ddy = spline.sx(u, 2), spline.sy(u, 2)
    speed_sq = dx ** 2 + dy ** 2
    if np.any(speed_sq <= 1e-24):
        raise CurvatureSingularityError("Spline has zero parametric speed")
    return np.abs(dx * ddy - dy * ddx) / speed_sq ** 1.5


def parameter_at(spline: PathSpline, s: np.ndarray) -> np.ndarray:
    """Map arc length to the spline parameter using a dense table between knots"""
    u_dense, s_dense = _arc_table(spline)
    return np.interp(s, s_dense, u_dense)


def plan_velocity(spline: PathSpline, limits: SpeedLimits, v_start: float = 0.0, v_end: float = 0.0,
                  ds: float = 0.1) -> VelocityProfile:
    """
    数値積分（前進・後退パス）による時間最適速度計画

    速度上限は min(v_max, ω_max/|κ|)、加速度は |v_{k+1}² − v_k²| ≤ 2 a_max Δs。
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    if v_start < 0 or v_end < 0:
        raise VelocityInfeasibleError("negative boundary speed", "start" if v_start < 0 else "end")

    length = spline.length
    intervals = max(1, int(math.ceil(length / ds - 1e-9)))
    s = np.linspace(0.0, length, intervals + 1)
    kappa = curvature_array(spline, parameter_at(spline, s))

    with np.errstate(divide="ignore"):
        turn_cap = np.where(kappa > 0, limits.omega_max / kappa, np.inf)
    cap = np.minimum(limits.v_max, turn_cap)
    if v_start > cap[0] + 1e-9:
        raise VelocityInfeasibleError(f"v_start={v_start:.3f} exceeds the limit {cap[0]:.3f}", "start")
    if v_end > cap[-1] + 1e-9:
        raise VelocityInfeasibleError(f"v_end={v_end:.3f} exceeds the limit {cap[-1]:.3f}", "end")

    step = np.diff(s)
    reach = 2.0 * limits.a_max * step

    forward = np.empty_like(s)
    forward[0] = v_start
    for k in range(len(s) - 1):
        forward[k + 1] = min(cap[k + 1], math.sqrt(forward[k] ** 2 + reach[k]))

    backward = np.empty_like(s)
    backward[-1] = v_end
    for k in range(len(s) - 2, -1, -1):
        backward[k] = min(cap[k], math.sqrt(backward[k + 1] ** 2 + reach[k]))

    v = np.minimum(forward, backward)
    if v[0] < v_start - 1e-9:
        raise VelocityInfeasibleError(f"cannot brake from v_start={v_start:.3f} to v_end={v_end:.3f}", "start")
    if v[-1] < v_end - 1e-9:
        raise VelocityInfeasibleError(f"cannot reach v_end={v_end:.3f} from v_start={v_start:.3f}", "end")
    v[0], v[-1] = v_start, v_end

    return VelocityProfile(s=s, v=v, curvature=kappa, v_max=limits.v_max, omega_max=limits.omega_max,
                           a_max=limits.a_max, v_start=v_start, v_end=v_end)


def traversal_time(profile: VelocityProfile) -> float:
    pair = profile.v[:-1] + profile.v[1:]
    if np.any(pair <= 0.0):
        k = int(np.flatnonzero(pair <= 0.0)[0])
        raise StalledProfileError(f"Speed is zero on both ends of sample interval {k}")
    return float(np.sum(2.0 * np.diff(profile.s) / pair))


def compute_metrics(spline: PathSpline, profile: VelocityProfile, ds: Optional[float] = None,
                    gvd: Optional[GvdMap] = None) -> PathMetrics:
    """
    走行距離 S、走行時間 T、最大・平均曲率

    曲率は ds/4 間隔の弧長サンプルで評価する。gvd を渡すとスプラインの節点の
    クリアランスも求める。
    """
    if ds is None:
        ds = float(np.max(np.diff(profile.s))) if profile.s.size > 1 else 0.1
    dense_step = max(ds / 4.0, 1e-6)
    samples = max(2, int(math.ceil(spline.length / dense_step)) + 1)
    s = np.linspace(0.0, spline.length, samples)
    kappa = curvature_array(spline, parameter_at(spline, s))

    metrics = PathMetrics(
        S=spline.length,
        T=traversal_time(profile),
        K_max=float(np.max(kappa)),
        K_mean=float(np.mean(kappa)),
    )
    if gvd is not None:
        metrics.min_clearance, metrics.mean_clearance = path_clearance(spline.knots, gvd)
    return metrics


def path_clearance(vertices: np.ndarray, gvd: GvdMap) -> Tuple[float, float]:
    """Minimum and mean obstacle clearance of a vertex list (meters)"""
    values = np.array([clearance_at(gvd, world_to_cell(gvd.grid, (float(x), float(y))))
                       for x, y in vertices])
    return float(values.min()), float(values.mean())


def _arc_table(spline: PathSpline) -> Tuple[np.ndarray, np.ndarray]:
    u_parts, s_parts = [], []
    for i, (a, b) in enumerate(zip(spline.u, spline.u[1:])):
        t = np.linspace(a, b, _SAMPLES_PER_SEGMENT + 1)
        speed = np.hypot(spline.sx(t, 1), spline.sy(t, 1))
        local = integrate.cumulative_trapezoid(speed, t, initial=0.0)
        # anchor each segment on the quadrature arc length at its knots
        seg_len = spline.arc_at_knots[i + 1] - spline.arc_at_knots[i]
        if local[-1] > 0:
            local *= seg_len / local[-1]
        start = 0 if i == 0 else 1
        u_parts.append(t[start:])
        s_parts.append(spline.arc_at_knots[i] + local[start:])
    return np.concatenate(u_parts), np.concatenate(s_parts)
