#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage
from scipy.spatial import cKDTree

from ..models import (
    CellIndex,
    CellRangeError,
    CellState,
    GvdMap,
    INF_SQ_DIST,
    MapDelta,
    NO_OBSTACLE,
    OccupancyGrid,
    UnknownPolicy,
)

logger = logging.getLogger(__name__)

_OFFSETS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dx or dy]
_SQRT2 = math.sqrt(2.0)
_EIGHT = np.ones((3, 3), dtype=bool)


def build_gvd(grid: OccupancyGrid, treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE) -> GvdMap:
    """
    占有格子地図からGVDを構築する

    距離は最近傍障害物セルのインデックスから整数演算で求めるため、
    全探索と完全に一致する。
    """
    obstacles = grid.blocked_mask(treat_unknown_as)
    sq_dist, nearest_x, nearest_y = _distance_fields(obstacles)
    is_voronoi = _voronoi_flags(sq_dist, obstacles)

    gvd = GvdMap(
        grid=grid,
        sq_dist=sq_dist,
        nearest_x=nearest_x,
        nearest_y=nearest_y,
        is_voronoi=is_voronoi,
        obstacles=obstacles,
    )
    logger.debug(f"GVD built: {gvd}")
    return gvd


def update_gvd(gvd: GvdMap, delta: MapDelta,
               treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE) -> GvdMap:
    """差分を適用したGVDを返す（入力のGVDは変更しない）"""
    updated, _ = apply_map_delta(gvd, delta, treat_unknown_as)
    return updated


def apply_map_delta(gvd: GvdMap, delta: MapDelta,
                    treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE) -> Tuple[GvdMap, np.ndarray]:
    """
    差分を局所的に適用したGVDと、値を計算し直したセルのマスクを返す

    解放された障害物を最近傍に持っていたセルだけを、その周囲の窓で距離変換し直す
    （窓の外にもっと近い障害物がありうる間は窓を広げる）。新しい障害物については、
    それが最も近い障害物になるセルの距離を直接書き換える。ボロノイ判定は
    距離または最近傍の集合が変わったセルとその8近傍だけやり直す。
    結果は変更後の地図に対する build_gvd とセル単位で一致する。
    """
    for c in delta.newly_occupied + delta.newly_freed:
        if not gvd.grid.in_bounds(c):
            raise CellRangeError(f"Delta cell {c} outside {gvd.width}x{gvd.height} grid")

    recomputed = np.zeros(gvd.sq_dist.shape, dtype=bool)
    if delta.is_empty():
        return gvd, recomputed

    grid = gvd.grid.copy()
    for c in delta.newly_occupied:
        grid.set_state(c, CellState.OCCUPIED)
    for c in delta.newly_freed:
        grid.set_state(c, CellState.FREE)

    obstacles = grid.blocked_mask(treat_unknown_as)
    freed = [c for c in delta.newly_freed if gvd.obstacles[c.iy, c.ix] and not obstacles[c.iy, c.ix]]
    occupied = [c for c in delta.newly_occupied if obstacles[c.iy, c.ix] and not gvd.obstacles[c.iy, c.ix]]

    sq_dist = gvd.sq_dist.copy()
    nearest_x = gvd.nearest_x.copy()
    nearest_y = gvd.nearest_y.copy()
    touched = np.zeros(sq_dist.shape, dtype=bool)

    # raise: cells that had a freed cell among their nearest obstacles
    if freed:
        for f in freed:
            rows, cols = _influence_window(gvd.sq_dist, f)
            gy, gx = np.ogrid[rows, cols]
            touched[rows, cols] |= (gx - f.ix) ** 2 + (gy - f.iy) ** 2 == gvd.sq_dist[rows, cols]
        _recompute_distances(sq_dist, nearest_x, nearest_y, gvd.obstacles & obstacles, touched)

    # lower: cells for which a new obstacle is at least as near as the current one
    for c in occupied:
        rows, cols = _influence_window(sq_dist, c)
        gy, gx = np.ogrid[rows, cols]
        d2 = (gx - c.ix) ** 2 + (gy - c.iy) ** 2
        window_sq = sq_dist[rows, cols]
        closer = d2 < window_sq
        touched[rows, cols] |= d2 <= window_sq
        window_sq[closer] = d2[closer]
        nearest_x[rows, cols][closer] = c.ix
        nearest_y[rows, cols][closer] = c.iy

    is_voronoi = gvd.is_voronoi.copy()
    if touched.any():
        recomputed = ndimage.binary_dilation(touched, structure=_EIGHT)
        labels, _ = ndimage.label(recomputed, structure=_EIGHT)
        for rows, cols in ndimage.find_objects(labels):
            flags = _voronoi_flags(sq_dist, obstacles, (rows.start, rows.stop, cols.start, cols.stop))
            part = recomputed[rows, cols]
            is_voronoi[rows, cols][part] = flags[rows, cols][part]

    logger.debug(
        f"GVD updated: +{len(occupied)} / -{len(freed)} cells, "
        f"{int(np.count_nonzero(recomputed))} cells recomputed"
    )
    updated = GvdMap(
        grid=grid,
        sq_dist=sq_dist,
        nearest_x=nearest_x,
        nearest_y=nearest_y,
        is_voronoi=is_voronoi,
        obstacles=obstacles,
    )
    return updated, recomputed


def clearance_at(gvd: GvdMap, c: CellIndex) -> float:
    """最近傍障害物までの距離 [m]（障害物が無い地図では inf）"""
    if not gvd.grid.in_bounds(c):
        raise CellRangeError(f"Cell {c} outside {gvd.width}x{gvd.height} grid")
    sq = int(gvd.sq_dist[c.iy, c.ix])
    if sq == INF_SQ_DIST:
        return float("inf")
    return float(np.sqrt(sq)) * gvd.resolution


def point_clearance(gvd: GvdMap, points: np.ndarray) -> np.ndarray:
    """Distance [m] from world points to the nearest obstacle cell centre (inf without obstacles)"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    oy, ox = np.nonzero(gvd.obstacles)
    if ox.size == 0:
        return np.full(len(points), np.inf)
    centres = np.column_stack((gvd.origin[0] + (ox + 0.5) * gvd.resolution,
                               gvd.origin[1] + (oy + 0.5) * gvd.resolution))
    distance, _ = cKDTree(centres).query(points)
    return np.asarray(distance, dtype=float)


def gvd_to_frame(gvd: GvdMap) -> pd.DataFrame:
    """Per-cell debug table with columns ix, iy, sq_dist, is_voronoi"""
    iy, ix = np.indices(gvd.sq_dist.shape)
    return pd.DataFrame({
        "ix": ix.ravel(),
        "iy": iy.ravel(),
        "sq_dist": gvd.sq_dist.ravel(),
        "is_voronoi": gvd.is_voronoi.ravel().astype(int),
    })


def _distance_fields(obstacles: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """二乗距離と最近傍障害物のインデックス（[iy, ix]配列）"""
    shape = obstacles.shape
    if not obstacles.any():
        return (
            np.full(shape, INF_SQ_DIST, dtype=np.int64),
            np.full(shape, NO_OBSTACLE, dtype=np.int64),
            np.full(shape, NO_OBSTACLE, dtype=np.int64),
        )

    # distance_transform_edt measures the distance to the nearest zero element
    indices = ndimage.distance_transform_edt(
        ~obstacles, return_distances=False, return_indices=True
    )
    nearest_y = indices[0].astype(np.int64)
    nearest_x = indices[1].astype(np.int64)

    iy, ix = np.indices(shape, dtype=np.int64)
    sq_dist = (ix - nearest_x) ** 2 + (iy - nearest_y) ** 2
    return sq_dist, nearest_x, nearest_y


def _influence_window(sq_dist: np.ndarray, c: CellIndex) -> Tuple[slice, slice]:
    """
    c を最近傍障害物の一つに持つ（持ちうる）セルをすべて含む窓

    そのようなセルの集合は凸なので、外周に |y - c| <= d(y) + √2 を満たす
    セルが残っている間だけ窓を広げればよい。
    """
    height, width = sq_dist.shape
    radius = 1
    while True:
        rows = slice(max(c.iy - radius, 0), min(c.iy + radius + 1, height))
        cols = slice(max(c.ix - radius, 0), min(c.ix + radius + 1, width))
        if rows.start == 0 and cols.start == 0 and rows.stop == height and cols.stop == width:
            return rows, cols

        gy, gx = np.ogrid[rows, cols]
        ring = np.maximum(np.abs(gx - c.ix), np.abs(gy - c.iy)) == radius
        d = np.sqrt(sq_dist[rows, cols].astype(float))
        near = np.hypot(gx - c.ix, gy - c.iy) <= d + _SQRT2
        if not (ring & near).any():
            return rows, cols
        radius *= 2


def _recompute_distances(sq_dist: np.ndarray, nearest_x: np.ndarray, nearest_y: np.ndarray,
                         obstacles: np.ndarray, cells: np.ndarray) -> None:
    """
    cells の距離と最近傍を obstacles に対して計算し直す（配列をその場で更新）

    cells の外接矩形を余白付きで切り出して距離変換する。見つかった距離が
    窓の外の障害物までの下限以下にならないセルがあれば余白を倍にする。
    """
    height, width = obstacles.shape
    ys, xs = np.nonzero(cells)
    r0, r1 = int(ys.min()), int(ys.max()) + 1
    c0, c1 = int(xs.min()), int(xs.max()) + 1
    margin = max(2, int(math.isqrt(int(sq_dist[cells].max()))) + 2)

    while True:
        y0, y1 = max(r0 - margin, 0), min(r1 + margin, height)
        x0, x1 = max(c0 - margin, 0), min(c1 + margin, width)
        whole_map = y0 == 0 and x0 == 0 and y1 == height and x1 == width
        sub = obstacles[y0:y1, x0:x1]
        local = cells[y0:y1, x0:x1]

        if not sub.any():
            if whole_map:
                sq_dist[cells] = INF_SQ_DIST
                nearest_x[cells] = NO_OBSTACLE
                nearest_y[cells] = NO_OBSTACLE
                return
            margin *= 2
            continue

        indices = ndimage.distance_transform_edt(~sub, return_distances=False, return_indices=True)
        wy = indices[0].astype(np.int64) + y0
        wx = indices[1].astype(np.int64) + x0
        gy, gx = np.indices(sub.shape, dtype=np.int64)
        gy += y0
        gx += x0
        window_sq = (gx - wx) ** 2 + (gy - wy) ** 2

        # distance to the nearest cell outside the window, map borders excluded
        bound = np.full(sub.shape, np.inf)
        if y0 > 0:
            bound = np.minimum(bound, gy - y0 + 1)
        if y1 < height:
            bound = np.minimum(bound, y1 - gy)
        if x0 > 0:
            bound = np.minimum(bound, gx - x0 + 1)
        if x1 < width:
            bound = np.minimum(bound, x1 - gx)

        if whole_map or (window_sq[local] <= bound[local] ** 2).all():
            sq_dist[y0:y1, x0:x1][local] = window_sq[local]
            nearest_x[y0:y1, x0:x1][local] = wx[local]
            nearest_y[y0:y1, x0:x1][local] = wy[local]
            return
        margin *= 2


@lru_cache(maxsize=None)
def _circle_offsets(sq: int) -> np.ndarray:
    """dx² + dy² = sq を満たす格子点 (dx, dy) の一覧（形状 (k, 2)）"""
    dx = np.arange(math.isqrt(sq) + 1, dtype=np.int64)
    rest = sq - dx * dx
    dy = np.rint(np.sqrt(rest)).astype(np.int64)
    hit = dy * dy == rest
    dx, dy = dx[hit], dy[hit]
    points = np.concatenate([np.stack([sx * dx, sy * dy], axis=1) for sx in (1, -1) for sy in (1, -1)])
    points = np.unique(points, axis=0)
    points.setflags(write=False)
    return points


def _nearest_sets(sq_dist: np.ndarray, obstacles: np.ndarray,
                  rows: slice, cols: slice) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    窓内の各セルについて、ちょうど距離 sqrt(sq_dist) にある障害物セルをすべて列挙する

    Returns:
        (ox, oy, ok): 形状 (k, h, w)。k はセルあたりの最大個数で、ok が False の要素は詰め物
    """
    height, width = obstacles.shape
    window_sq = sq_dist[rows, cols]
    h, w = window_sq.shape
    flat = window_sq.ravel()

    values, inverse = np.unique(flat, return_inverse=True)
    inverse = inverse.ravel()
    circles: List[np.ndarray] = [_circle_offsets(int(v)) for v in values]
    counts = np.array([len(c) for c in circles], dtype=np.int64)
    offsets = np.concatenate(circles)
    starts = np.cumsum(counts) - counts

    per_cell = counts[inverse]
    cell = np.repeat(np.arange(flat.size), per_cell)
    within = np.arange(cell.size) - np.repeat(np.cumsum(per_cell) - per_cell, per_cell)
    picked = offsets[np.repeat(starts[inverse], per_cell) + within]

    ox = cell % w + cols.start + picked[:, 0]
    oy = cell // w + rows.start + picked[:, 1]
    hit = (ox >= 0) & (ox < width) & (oy >= 0) & (oy < height)
    hit[hit] = obstacles[oy[hit], ox[hit]]
    cell, ox, oy = cell[hit], ox[hit], oy[hit]

    size = np.bincount(cell, minlength=flat.size)
    rank = np.arange(cell.size) - np.repeat(np.cumsum(size) - size, size)
    k = max(int(size.max()), 1)
    tx = np.zeros((k, flat.size), dtype=np.int64)
    ty = np.zeros((k, flat.size), dtype=np.int64)
    ok = np.zeros((k, flat.size), dtype=bool)
    tx[rank, cell] = ox
    ty[rank, cell] = oy
    ok[rank, cell] = True
    return tx.reshape(k, h, w), ty.reshape(k, h, w), ok.reshape(k, h, w)


def _voronoi_flags(sq_dist: np.ndarray, obstacles: np.ndarray,
                   window: Optional[Tuple[int, int, int, int]] = None) -> np.ndarray:
    """
    ボロノイエッジの判定

    p の最近傍障害物の集合 N(p) と8近傍 q の N(q) から、互いに隣接しない
    o_p, o_q の組を選べて、p が q 以上に二等分線に近い場合に p をエッジとする。
    最近傍を一つに決めないので、地図の鏡映・転置に対して判定も同じように写る。
    window=(r0, r1, c0, c1) を指定するとその範囲のみ判定する。
    """
    height, width = obstacles.shape
    flags = np.zeros((height, width), dtype=bool)
    if not obstacles.any():
        return flags

    r0, r1, c0, c1 = window if window is not None else (0, height, 0, width)
    # one-cell margin so that every cell in the window sees all of its neighbours
    rows = slice(max(r0 - 1, 0), min(r1 + 1, height))
    cols = slice(max(c0 - 1, 0), min(c1 + 1, width))

    tx, ty, ok = _nearest_sets(sq_dist, obstacles, rows, cols)
    sq = sq_dist[rows, cols]
    free = ~obstacles[rows, cols]
    gy, gx = np.indices(sq.shape, dtype=np.int64)
    gy += rows.start
    gx += cols.start

    k, h, w = tx.shape
    local = np.zeros((h, w), dtype=bool)
    for dx, dy in _OFFSETS:
        p_cells = (slice(max(0, -dy), h - max(0, dy)), slice(max(0, -dx), w - max(0, dx)))
        q_cells = (slice(max(0, dy), h - max(0, -dy)), slice(max(0, dx), w - max(0, -dx)))
        px, py, sq_p = gx[p_cells], gy[p_cells], sq[p_cells]
        qx, qy, sq_q = gx[q_cells], gy[q_cells], sq[q_cells]

        hit = np.zeros(px.shape, dtype=bool)
        for a in range(k):
            ok_p = ok[a][p_cells]
            if not ok_p.any():
                continue
            opx, opy = tx[a][p_cells], ty[a][p_cells]
            rhs = (qx - opx) ** 2 + (qy - opy) ** 2 - sq_q
            for b in range(k):
                ok_q = ok[b][q_cells]
                oqx, oqy = tx[b][q_cells], ty[b][q_cells]
                apart = np.maximum(np.abs(opx - oqx), np.abs(opy - oqy)) > 1
                lhs = (px - oqx) ** 2 + (py - oqy) ** 2 - sq_p
                hit |= ok_p & ok_q & apart & (lhs <= rhs)
        local[p_cells] |= free[p_cells] & hit

    top, left = r0 - rows.start, c0 - cols.start
    flags[r0:r1, c0:c1] = local[top: top + (r1 - r0), left: left + (c1 - c0)]
    return flags
