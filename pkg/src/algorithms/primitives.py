#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.interpolate import BPoly

from ..models import (
    HEADING_VECTORS,
    NUM_HEADINGS,
    MotionPrimitive,
    Pose,
    PrimitiveConfig,
    PrimitiveGenerationError,
    PrimitiveKind,
    PrimitiveSet,
    heading_angle,
)

logger = logging.getLogger(__name__)

_EPS = 1e-9
# dense parameter samples used for arc length and curvature of a Bezier curve
_BEZIER_SAMPLES = 400


def generate_primitives(resolution: float, footprint_half_width: float,
                        config: Optional[PrimitiveConfig] = None) -> PrimitiveSet:
    """
    16方位それぞれについてモーションプリミティブを生成する

    直進（1セル・3セル）、±1方位へのクインティック・ベジェ曲線、
    その場回転（±1方位）を含む。終点は全て格子セルの中心に一致する。
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if footprint_half_width <= 0:
        raise ValueError("footprint half-width must be positive")
    config = config or PrimitiveConfig()
    spacing = config.sample_spacing if config.sample_spacing > 0 else resolution / 2.0

    primitives: List[MotionPrimitive] = []
    for h in range(NUM_HEADINGS):
        for k in config.straight_lengths:
            primitives.append(_straight(h, k, resolution, spacing))
        for step in (1, -1):
            primitives.append(_curve(h, (h + step) % NUM_HEADINGS, config, resolution, spacing))
        for step in (1, -1):
            primitives.append(_rotation(h, (h + step) % NUM_HEADINGS))
        if config.allow_backward:
            primitives.append(_straight(h, 1, resolution, spacing, backward=True))

    r_c = footprint_half_width * math.sqrt(2.0)
    for prim in primitives:
        prim.swath = compute_swath(prim, footprint_half_width, resolution)
        prim.center_cells = center_cells(prim, resolution) if not prim.is_rotation else [(0, 0)]

    prim_set = PrimitiveSet(resolution=resolution, footprint=footprint_half_width, primitives=primitives)
    logger.info(f"Generated {len(prim_set)} primitives (r_c={r_c:.3f} m, res={resolution} m)")
    return prim_set


def compute_swath(prim: MotionPrimitive, footprint_half_width: float,
                  resolution: float) -> List[Tuple[int, int]]:
    """
    プリミティブに沿ってロボットの正方形フットプリントが覆うセル（原点セルからのオフセット）

    その場回転は外接円 r_c と交わるセル全体とする。
    """
    cells = set()
    if prim.is_rotation:
        r_c = footprint_half_width * math.sqrt(2.0)
        cells.update(_disc_cells(r_c, resolution))
    else:
        for pose in prim.poses:
            cells.update(_square_cells(pose, footprint_half_width, resolution))
    return sorted(cells)


def center_cells(prim: MotionPrimitive, resolution: float) -> List[Tuple[int, int]]:
    """Cells touched by the polyline of the robot centre"""
    cells = set()
    points = [(p.x, p.y) for p in prim.poses]
    for a, b in zip(points, points[1:]):
        cells.update(_segment_cells(a, b, resolution))
    cells.add((0, 0))
    return sorted(cells)


def _straight(h: int, k: int, resolution: float, spacing: float, backward: bool = False) -> MotionPrimitive:
    i, j = HEADING_VECTORS[h]
    sign = -1 if backward else 1
    end = (sign * k * i, sign * k * j)
    ex, ey = end[0] * resolution, end[1] * resolution
    length = math.hypot(ex, ey)
    n = max(2, int(math.ceil(length / spacing - _EPS)) + 1)
    theta = heading_angle(h)

    ts = np.linspace(0.0, 1.0, n)
    poses = [Pose(float(t * ex), float(t * ey), theta) for t in ts]
    poses[0] = Pose(0.0, 0.0, theta)
    poses[-1] = Pose(ex, ey, theta)
    return MotionPrimitive(
        start_heading=h,
        end_heading=h,
        poses=poses,
        kind=PrimitiveKind.BACKWARD if backward else PrimitiveKind.STRAIGHT,
        end_cell=end,
    )


def _curve(h_start: int, h_end: int, config: PrimitiveConfig,
           resolution: float, spacing: float) -> MotionPrimitive:
    """
    クインティック・ベジェ曲線による旋回プリミティブ

    制御点は始点・終点の接線方向に L/6, L/3 の位置に置き、両端の曲率を0とする。
    """
    vi, vj = HEADING_VECTORS[h_start]
    wi, wj = HEADING_VECTORS[h_end]
    m = config.turn_scale
    end = (m * (vi + wi), m * (vj + wj))

    p0 = np.array([0.0, 0.0])
    p5 = np.array([end[0] * resolution, end[1] * resolution])
    th0, th1 = heading_angle(h_start), heading_angle(h_end)
    t0 = np.array([math.cos(th0), math.sin(th0)])
    t1 = np.array([math.cos(th1), math.sin(th1)])
    chord = float(np.linalg.norm(p5 - p0))

    ctrl = np.array([
        p0,
        p0 + chord / 6.0 * t0,
        p0 + chord / 3.0 * t0,
        p5 - chord / 3.0 * t1,
        p5 - chord / 6.0 * t1,
        p5,
    ])
    curve = BPoly(ctrl[:, None, :], [0.0, 1.0])
    d1 = curve.derivative(1)
    d2 = curve.derivative(2)

    u = np.linspace(0.0, 1.0, _BEZIER_SAMPLES)
    xy = curve(u)
    dxy = d1(u)
    ddxy = d2(u)
    speed = np.hypot(dxy[:, 0], dxy[:, 1])
    kappa = np.abs(dxy[:, 0] * ddxy[:, 1] - dxy[:, 1] * ddxy[:, 0]) / np.maximum(speed, _EPS) ** 3
    name = f"curve {h_start}->{h_end}"
    if float(kappa.max()) > config.max_curvature:
        raise PrimitiveGenerationError(
            f"{name}: curvature {kappa.max():.3f} 1/m exceeds bound {config.max_curvature:.3f} 1/m"
        )

    arc = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(xy, axis=0).T))))
    n = max(3, int(math.ceil(arc[-1] / spacing - _EPS)) + 1)
    u_samples = np.interp(np.linspace(0.0, arc[-1], n), arc, u)
    pts = curve(u_samples)
    tangents = d1(u_samples)

    poses = [Pose(float(x), float(y), math.atan2(ty, tx)) for (x, y), (tx, ty) in zip(pts, tangents)]
    poses[0] = Pose(0.0, 0.0, th0)
    poses[-1] = Pose(float(p5[0]), float(p5[1]), th1)
    return MotionPrimitive(
        start_heading=h_start,
        end_heading=h_end,
        poses=poses,
        kind=PrimitiveKind.CURVE,
        end_cell=end,
    )


def _rotation(h_start: int, h_end: int) -> MotionPrimitive:
    return MotionPrimitive(
        start_heading=h_start,
        end_heading=h_end,
        poses=[Pose(0.0, 0.0, heading_angle(h_start)), Pose(0.0, 0.0, heading_angle(h_end))],
        kind=PrimitiveKind.ROTATE,
        end_cell=(0, 0),
    )


def _square_cells(pose: Pose, half: float, resolution: float) -> Iterable[Tuple[int, int]]:
    """Cells whose interiors overlap the oriented square (separating axis test)"""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    extent = half * (abs(c) + abs(s))
    hc = resolution / 2.0

    lo_x = int(math.floor((pose.x - extent) / resolution)) - 1
    hi_x = int(math.ceil((pose.x + extent) / resolution)) + 1
    lo_y = int(math.floor((pose.y - extent) / resolution)) - 1
    hi_y = int(math.ceil((pose.y + extent) / resolution)) + 1
    gx, gy = np.meshgrid(np.arange(lo_x, hi_x + 1), np.arange(lo_y, hi_y + 1))
    dx = gx * resolution - pose.x
    dy = gy * resolution - pose.y

    # world axes
    overlap = (np.abs(dx) < extent + hc - _EPS) & (np.abs(dy) < extent + hc - _EPS)
    # footprint axes
    cell_extent = hc * (abs(c) + abs(s))
    overlap &= np.abs(dx * c + dy * s) < half + cell_extent - _EPS
    overlap &= np.abs(-dx * s + dy * c) < half + cell_extent - _EPS
    return zip(gx[overlap].tolist(), gy[overlap].tolist())


def _disc_cells(radius: float, resolution: float) -> Iterable[Tuple[int, int]]:
    """Cells whose interiors intersect the open disc of `radius` around the origin cell centre"""
    k = int(math.ceil(radius / resolution)) + 1
    gx, gy = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1))
    hc = resolution / 2.0
    # closest point of each cell to the origin
    nx = np.maximum(np.abs(gx * resolution) - hc, 0.0)
    ny = np.maximum(np.abs(gy * resolution) - hc, 0.0)
    inside = nx ** 2 + ny ** 2 < radius ** 2 - _EPS
    return zip(gx[inside].tolist(), gy[inside].tolist())


def _segment_cells(a: Tuple[float, float], b: Tuple[float, float],
                   resolution: float) -> Iterable[Tuple[int, int]]:
    """Closed cells touched by segment a-b (slab test with tolerance)"""
    hc = resolution / 2.0
    lo_x = int(math.floor(min(a[0], b[0]) / resolution + 0.5)) - 1
    hi_x = int(math.floor(max(a[0], b[0]) / resolution + 0.5)) + 1
    lo_y = int(math.floor(min(a[1], b[1]) / resolution + 0.5)) - 1
    hi_y = int(math.floor(max(a[1], b[1]) / resolution + 0.5)) + 1

    out = []
    dx, dy = b[0] - a[0], b[1] - a[1]
    for ix in range(lo_x, hi_x + 1):
        for iy in range(lo_y, hi_y + 1):
            cx, cy = ix * resolution, iy * resolution
            t_lo, t_hi = 0.0, 1.0
            hit = True
            for p0, d, c in ((a[0], dx, cx), (a[1], dy, cy)):
                lo, hi = c - hc - _EPS, c + hc + _EPS
                if abs(d) < 1e-15:
                    if p0 < lo or p0 > hi:
                        hit = False
                        break
                    continue
                t1, t2 = (lo - p0) / d, (hi - p0) / d
                if t1 > t2:
                    t1, t2 = t2, t1
                t_lo, t_hi = max(t_lo, t1), min(t_hi, t2)
                if t_lo > t_hi:
                    hit = False
                    break
            if hit:
                out.append((ix, iy))
    return out
