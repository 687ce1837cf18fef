#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import heapq
import logging
import math
from collections import deque
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ..models import (
    CellIndex,
    GvdMap,
    INF_SQ_DIST,
    IsolatedCellError,
    NoVoronoiRouteError,
    PreconditionError,
    SpeedLimits,
    VoronoiCorridor,
    VoronoiPath,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
# Fixed neighbour order keeps BFS and A* deterministic
_NEIGHBORS = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1)]
_HEADINGS = np.array([math.atan2(dy, dx) for dx, dy in _NEIGHBORS])
# heading change [rad] between arrival direction i and departure direction j
_TURNS = np.abs(np.angle(np.exp(1j * (_HEADINGS[None, :] - _HEADINGS[:, None]))))
# routes up to this factor slower than the fastest one join the corridor
DEFAULT_ROUTE_STRETCH = 0.2


def clearance_ok_mask(gvd: GvdMap, r_c: float) -> np.ndarray:
    """空きセルのうちクリアランスが r_c 以上のもの"""
    return ~gvd.obstacles & (gvd.clearance_map() >= r_c - 1e-9)


def nearest_gvd_cell(gvd: GvdMap, c: CellIndex, r_c: float) -> Tuple[CellIndex, List[CellIndex]]:
    """
    幅優先探索で最も近いボロノイセルを求める

    Returns:
        (ボロノイセル, c からそのセルまでのグリッド経路)
    """
    valid = clearance_ok_mask(gvd, r_c)
    if not gvd.grid.in_bounds(c) or not valid[c.iy, c.ix]:
        raise PreconditionError(f"Cell {c} is not free with clearance >= {r_c:.3f} m")

    height, width = valid.shape
    parent: Dict[Tuple[int, int], Optional[Tuple[int, int]]] = {(c.ix, c.iy): None}
    queue = deque([(c.ix, c.iy)])

    while queue:
        x, y = queue.popleft()
        if gvd.is_voronoi[y, x]:
            return CellIndex(x, y), _unwind(parent, (x, y))
        for dx, dy in _NEIGHBORS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < width and 0 <= ny < height and valid[ny, nx] and (nx, ny) not in parent:
                parent[(nx, ny)] = (x, y)
                queue.append((nx, ny))

    raise IsolatedCellError(f"No Voronoi cell reachable from {c} with clearance >= {r_c:.3f} m")


def voronoi_astar(gvd: GvdMap, c1: CellIndex, c2: CellIndex, r_c: float) -> List[CellIndex]:
    """
    ボロノイエッジ上のA*探索（軸方向 1、斜め √2）

    同じ f 値では h の小さい方、次にセル座標の辞書順を優先する。
    """
    valid = clearance_ok_mask(gvd, r_c) & gvd.is_voronoi
    for c in (c1, c2):
        if not gvd.grid.in_bounds(c) or not valid[c.iy, c.ix]:
            raise PreconditionError(f"Cell {c} is not a valid Voronoi cell")
    if c1 == c2:
        return [c1]

    height, width = valid.shape
    goal = (c2.ix, c2.iy)

    def octile(x: int, y: int) -> float:
        dx, dy = abs(x - goal[0]), abs(y - goal[1])
        return (SQRT2 - 1.0) * min(dx, dy) + max(dx, dy)

    start = (c1.ix, c1.iy)
    g: Dict[Tuple[int, int], float] = {start: 0.0}
    parent: Dict[Tuple[int, int], Optional[Tuple[int, int]]] = {start: None}
    h0 = octile(*start)
    open_list = [(h0, h0, start[0], start[1])]
    closed = set()

    while open_list:
        _, _, x, y = heapq.heappop(open_list)
        if (x, y) in closed:
            continue
        if (x, y) == goal:
            return _unwind(parent, goal)
        closed.add((x, y))

        for dx, dy in _NEIGHBORS:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < width and 0 <= ny < height) or not valid[ny, nx]:
                continue
            if (nx, ny) in closed:
                continue
            cost = g[(x, y)] + (SQRT2 if dx and dy else 1.0)
            if cost < g.get((nx, ny), math.inf):
                g[(nx, ny)] = cost
                parent[(nx, ny)] = (x, y)
                h = octile(nx, ny)
                heapq.heappush(open_list, (cost + h, h, nx, ny))

    raise NoVoronoiRouteError(f"Voronoi cells {c1} and {c2} are not connected")


def shortest_voronoi_path(gvd: GvdMap, start: CellIndex, goal: CellIndex, r_c: float) -> VoronoiPath:
    """L1 + L3 + L2 を連結したボロノイ経路"""
    c1, l1 = nearest_gvd_cell(gvd, start, r_c)
    c2, l2_reversed = nearest_gvd_cell(gvd, goal, r_c)
    l3 = voronoi_astar(gvd, c1, c2, r_c)
    l2 = list(reversed(l2_reversed))

    cells = l1 + l3[1:] + l2[1:]
    i1 = len(l1) - 1
    i2 = i1 + len(l3) - 1
    path = VoronoiPath(cells=cells, segments=(i1, i2))
    logger.debug(f"Voronoi path: L1={len(l1)} L3={len(l3)} L2={len(l2)} cells")
    return path


def near_optimal_voronoi_cells(gvd: GvdMap, c1: CellIndex, c2: CellIndex, r_c: float,
                               limits: SpeedLimits, stretch: float) -> np.ndarray:
    """
    c1 から c2 までのボロノイ経路のうち、最短の (1 + stretch) 倍以内の時間で通れるセル

    状態は (セル, 進入方向) で、辺コストは移動時間と方向転換の時間の和。
    行き止まりの枝は出入りに180°の転回が必要なので残らない。
    """
    if stretch < 0:
        raise ValueError(f"stretch must be non-negative, got {stretch}")
    valid = clearance_ok_mask(gvd, r_c) & gvd.is_voronoi
    for c in (c1, c2):
        if not gvd.grid.in_bounds(c) or not valid[c.iy, c.ix]:
            raise PreconditionError(f"Cell {c} is not a valid Voronoi cell")

    height, width = valid.shape
    mask = np.zeros((height, width), dtype=bool)
    if c1 == c2:
        mask[c1.iy, c1.ix] = True
        return mask

    index = -np.ones((height, width), dtype=np.int64)
    ys, xs = np.nonzero(valid)
    index[ys, xs] = np.arange(len(xs))
    k = len(_NEIGHBORS)

    rows, cols, weights = [], [], []
    for j, (dx, dy) in enumerate(_NEIGHBORS):
        tx, ty = xs + dx, ys + dy
        ok = (tx >= 0) & (tx < width) & (ty >= 0) & (ty < height)
        ok[ok] = valid[ty[ok], tx[ok]]
        src = index[ys[ok], xs[ok]]
        dst = index[ty[ok], tx[ok]]
        move = math.hypot(dx, dy) * gvd.resolution / limits.v_max
        for i in range(k):
            rows.append(src * k + i)
            cols.append(dst * k + j)
            weights.append(np.full(src.size, move + _TURNS[i, j] / limits.omega_max))

    n = len(xs) * k
    graph = sp.csr_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    heading = np.arange(k)
    starts = index[c1.iy, c1.ix] * k + heading
    goals = index[c2.iy, c2.ix] * k + heading
    forward = csgraph.dijkstra(graph, directed=True, indices=starts, min_only=True)
    backward = csgraph.dijkstra(graph.T.tocsr(), directed=True, indices=goals, min_only=True)

    best = float(forward[goals].min())
    if not math.isfinite(best):
        raise NoVoronoiRouteError(f"Voronoi cells {c1} and {c2} are not connected")
    via = (forward + backward).reshape(-1, k).min(axis=1)
    keep = via <= (1.0 + stretch) * best + 1e-9
    mask[ys[keep], xs[keep]] = True
    logger.debug(f"Near-optimal Voronoi cells: {int(keep.sum())} within {best * (1.0 + stretch):.2f}s")
    return mask


def build_corridor(gvd: GvdMap, path: VoronoiPath, margin_cells: int = 0,
                   extra: Optional[np.ndarray] = None) -> VoronoiCorridor:
    """
    経路セルごとに一辺 2d_k の正方形を取り、その和集合と空きセルの積をとる

    正方形はチェビシェフ半径 round(d_k / resolution) のセル集合として扱う。
    extra（セルのマスク）を渡すと、そのセルにも同じ正方形を加える。
    """
    height, width = gvd.sq_dist.shape
    mask = np.zeros((height, width), dtype=bool)

    cells = [(c.ix, c.iy) for c in path.cells]
    if extra is not None:
        ys, xs = np.nonzero(extra)
        cells.extend(zip(xs.tolist(), ys.tolist()))

    for x, y in cells:
        sq = int(gvd.sq_dist[y, x])
        if sq == INF_SQ_DIST:
            mask[:, :] = True
            break
        k = int(math.floor(math.sqrt(sq) + 0.5)) + margin_cells
        mask[max(y - k, 0): min(y + k + 1, height),
             max(x - k, 0): min(x + k + 1, width)] = True

    mask &= ~gvd.obstacles
    return VoronoiCorridor(mask=mask, source=path)


def full_space_corridor(gvd: GvdMap) -> VoronoiCorridor:
    """Baseline search space: every traversable cell"""
    return VoronoiCorridor(mask=~gvd.obstacles, source=None)


def _unwind(parent: Dict[Tuple[int, int], Optional[Tuple[int, int]]],
            end: Tuple[int, int]) -> List[CellIndex]:
    cells = []
    node: Optional[Tuple[int, int]] = end
    while node is not None:
        cells.append(CellIndex(*node))
        node = parent[node]
    cells.reverse()
    return cells
