#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..models import (
    BoxQp,
    GvdMap,
    Pose,
    PreconditionError,
    QpSizeError,
    ReferenceIntegrityError,
    ReferencePath,
    SmoothedPath,
    SmootherConfig,
    SolverStatus,
    world_to_cell,
)
from .gvd import clearance_at
from .qp_solver import solve_box_qp

logger = logging.getLogger(__name__)

# keeps the QP strictly convex when the reference weight is switched off
_MIN_REFERENCE_WEIGHT = 1e-9


def build_reference(search_path: Sequence[Pose], gvd: GvdMap, r_c: float,
                    spacing: float = 0.1) -> ReferencePath:
    """
    探索経路を弧長 spacing 間隔で再標本化し、各頂点のクリアランス d_i と余裕 b_i を求める

    b_i = (√2/2)·d_i − r_c（負の場合は 0 で頂点を固定）
    """
    points = _dedupe([(p.x, p.y) for p in search_path])
    if len(points) < 2:
        raise PreconditionError("Search path must contain at least two distinct positions")

    seg = np.hypot(*np.diff(points, axis=0).T)
    arc = np.concatenate(([0.0], np.cumsum(seg)))
    length = float(arc[-1])
    if length < 2.0 * spacing - 1e-9:
        raise PreconditionError(f"Search path is {length:.3f} m long; at least {2 * spacing:.3f} m required")

    n = int(math.ceil(length / spacing - 1e-6)) + 1
    s = np.linspace(0.0, length, n)
    vertices = np.column_stack((np.interp(s, arc, points[:, 0]), np.interp(s, arc, points[:, 1])))
    vertices[0], vertices[-1] = points[0], points[-1]

    clearances = np.array([clearance_at(gvd, world_to_cell(gvd.grid, tuple(v))) for v in vertices])
    short = np.flatnonzero(clearances < r_c - 1e-9)
    if short.size:
        i = int(short[0])
        raise ReferenceIntegrityError(
            f"Reference vertex {i} at ({vertices[i][0]:.3f}, {vertices[i][1]:.3f}) has clearance "
            f"{clearances[i]:.3f} m < r_c={r_c:.3f} m"
        )
    margins = np.maximum(0.0, math.sqrt(2.0) / 2.0 * clearances - r_c)
    return ReferencePath(vertices=vertices, clearances=clearances, margins=margins, r_c=r_c)


def second_difference(n: int) -> sp.csr_matrix:
    """(n-2) x n second-difference operator"""
    return sp.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(n - 2, n), format="csr")


def assemble_qp(ref: ReferencePath, cfg: SmootherConfig) -> BoxQp:
    """
    平滑化 QP を組み立てる（変数は x1, y1, x2, y2, ... の順）

    P = 2(w_s·DᵀD ⊗ I2 + w_r·I)、q = −2 w_r x_ref、両端点は l = u。
    """
    n = ref.n
    if n < 3:
        raise QpSizeError(f"Smoothing needs at least 3 vertices, got {n}")

    w_r = max(cfg.w_r, _MIN_REFERENCE_WEIGHT)
    D = second_difference(n)
    smooth_term = sp.kron(D.T @ D, sp.identity(2), format="csc")
    P = (2.0 * (cfg.w_s * smooth_term + w_r * sp.identity(2 * n, format="csc"))).tocsc()

    x_ref = ref.vertices.reshape(-1)
    q = -2.0 * w_r * x_ref
    b = np.repeat(ref.margins, 2)
    lower = x_ref - b
    upper = x_ref + b
    for i in (0, 1, 2 * n - 2, 2 * n - 1):
        lower[i] = upper[i] = x_ref[i]
    return BoxQp(P=P, q=q, lower=lower, upper=upper)


def objective(vertices: np.ndarray, ref: ReferencePath, cfg: SmootherConfig) -> float:
    """w_s Σ‖x_{i+1} − 2x_i + x_{i−1}‖² + w_r Σ‖x_i − x_iref‖²"""
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    second = vertices[2:] - 2.0 * vertices[1:-1] + vertices[:-2]
    deviation = vertices - ref.vertices
    return float(cfg.w_s * np.sum(second ** 2) + cfg.w_r * np.sum(deviation ** 2))


def smooth(ref: ReferencePath, cfg: Optional[SmootherConfig] = None) -> SmoothedPath:
    """参照経路の近傍で滑らかな経路を求める"""
    cfg = cfg or SmootherConfig()
    qp = assemble_qp(ref, cfg)
    solution = solve_box_qp(qp, cfg, warm_start=ref.vertices.reshape(-1))

    vertices = solution.x.reshape(-1, 2).copy()
    vertices[0], vertices[-1] = ref.vertices[0], ref.vertices[-1]
    if solution.status == SolverStatus.MAX_ITERATIONS:
        logger.warning(f"Smoothing returned the best iterate after {solution.iterations} iterations")

    result = SmoothedPath(
        vertices=vertices,
        reference=ref,
        status=solution.status,
        iterations=solution.iterations,
        objective=objective(vertices, ref, cfg),
        reference_objective=objective(ref.vertices, ref, cfg),
        solve_time=solution.solve_time,
    )
    logger.debug(
        f"Smoothed {ref.n} vertices in {solution.solve_time * 1000:.3f} ms "
        f"({solution.iterations} iterations, polished={solution.polished})"
    )
    return result


def _dedupe(points: List[tuple]) -> np.ndarray:
    out = [points[0]]
    for p in points[1:]:
        if math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > 1e-12:
            out.append(p)
    return np.asarray(out, dtype=float)
