#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import heapq
import itertools
import logging
import math
import time
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ..models import (
    CellIndex,
    GvdMap,
    HeuristicMap,
    LatticeState,
    MotionPrimitive,
    NoPathError,
    Pose,
    PreconditionError,
    PrimitiveSet,
    SearchMode,
    SearchResult,
    SpeedLimits,
    VoronoiCorridor,
    VoronoiField,
    heading_angle,
    nearest_heading,
)

logger = logging.getLogger(__name__)

# h2D is measured in octile grid steps while lattice motions cut across them.
# cos(π/8) is the worst Euclidean to octile length ratio, so the scaled
# heuristic stays admissible; see "Heuristic admissibility" in DESIGN.md.
DEFAULT_HEURISTIC_SCALE = math.cos(math.pi / 8.0)

_STEPS = [(1, 0, 1.0), (0, 1, 1.0), (-1, 0, 1.0), (0, -1, 1.0),
          (1, 1, math.sqrt(2.0)), (-1, 1, math.sqrt(2.0)),
          (-1, -1, math.sqrt(2.0)), (1, -1, math.sqrt(2.0))]


def primitive_time(prim: MotionPrimitive, limits: SpeedLimits) -> float:
    """一様運動を仮定した最小移動時間 [s]"""
    return max(prim.length / limits.v_max, prim.delta_theta / limits.omega_max)


class LatticeCostModel:
    """
    プリミティブコストの参照テーブル

    回廊内は rho、回廊外と障害物は inf を持つペナルティ格子を
    スワスの最大オフセット分だけパディングして保持する。
    同じ開始方位のプリミティブはスワスを連結し、1回の参照でまとめて評価する。
    """

    def __init__(self, gvd: GvdMap, field: VoronoiField, prims: PrimitiveSet, limits: SpeedLimits):
        self.limits = limits
        self.r_c = prims.r_c
        self.by_heading = prims.by_heading()

        pad = 1
        for prim in prims.primitives:
            for dx, dy in list(prim.swath) + list(prim.center_cells):
                pad = max(pad, abs(dx), abs(dy))
        self.pad = pad

        penalty = np.where(field.mask & ~gvd.obstacles, field.rho, np.inf)
        self.penalty = np.pad(penalty, pad, mode="constant", constant_values=np.inf)
        center_ok = gvd.clearance_map() >= self.r_c - 1e-9
        self.center_ok = np.pad(center_ok, pad, mode="constant", constant_values=False)

        self._tables = {h: self._table(group) for h, group in self.by_heading.items() if group}

    def _table(self, group: List[MotionPrimitive]):
        swaths = [np.asarray(p.swath, dtype=np.int64).reshape(-1, 2) for p in group]
        centers = [np.asarray(p.center_cells or [(0, 0)], dtype=np.int64).reshape(-1, 2) for p in group]
        swath_starts = np.cumsum([0] + [len(s) for s in swaths[:-1]])
        center_starts = np.cumsum([0] + [len(c) for c in centers[:-1]])
        swath = np.concatenate(swaths)
        center = np.concatenate(centers)
        times = np.array([primitive_time(p, self.limits) for p in group])
        return swath[:, 0], swath[:, 1], swath_starts, center[:, 0], center[:, 1], center_starts, times

    def heading_costs(self, ih: int, ix: int, iy: int) -> np.ndarray:
        """Costs of every primitive starting with heading ih, aligned with by_heading[ih]"""
        table = self._tables.get(ih)
        if table is None:
            return np.empty(0)
        sdx, sdy, s_starts, cdx, cdy, c_starts, times = table
        ox, oy = ix + self.pad, iy + self.pad

        worst = np.maximum.reduceat(self.penalty[oy + sdy, ox + sdx], s_starts)
        centers_ok = np.logical_and.reduceat(self.center_ok[oy + cdy, ox + cdx], c_starts)
        return np.where(centers_ok & np.isfinite(worst), times * (worst + 1.0), np.inf)

    def cost(self, prim: MotionPrimitive, ix: int, iy: int) -> float:
        group = self.by_heading.get(prim.start_heading, [])
        for k, candidate in enumerate(group):
            if candidate is prim:
                return float(self.heading_costs(prim.start_heading, ix, iy)[k])
        raise ValueError(f"{prim!r} is not part of this primitive set")


def primitive_cost(prim: MotionPrimitive, at: LatticeState, field: VoronoiField, gvd: GvdMap,
                   limits: SpeedLimits, r_c: Optional[float] = None) -> float:
    """
    状態 at から実行したプリミティブのコスト

    スワスが障害物または回廊外のセルにかかる場合は inf。
    """
    r_c = r_c if r_c is not None else 0.0
    prims = PrimitiveSet(resolution=gvd.resolution, footprint=r_c / math.sqrt(2.0), primitives=[prim])
    return LatticeCostModel(gvd, field, prims, limits).cost(prim, at.ix, at.iy)


def build_h2d(gvd: GvdMap, corridor: VoronoiCorridor, goal: CellIndex, field: VoronoiField,
              limits: SpeedLimits) -> HeuristicMap:
    """
    ゴールからの2次元ダイクストラ（回廊内・8近傍）

    辺コストは (ステップ長 / v_max)·(ゴール側セルの rho + 1)。回廊外は inf。
    """
    mask = corridor.mask & ~gvd.obstacles
    if not corridor.contains(goal) or not mask[goal.iy, goal.ix]:
        raise PreconditionError(f"Goal cell {goal} lies outside the corridor")

    height, width = mask.shape
    index = -np.ones((height, width), dtype=np.int64)
    ys, xs = np.nonzero(mask)
    index[ys, xs] = np.arange(len(xs))
    rho = field.rho

    rows, cols, weights = [], [], []
    for dx, dy, step in _STEPS:
        tx, ty = xs + dx, ys + dy
        ok = (tx >= 0) & (tx < width) & (ty >= 0) & (ty < height)
        ok[ok] = mask[ty[ok], tx[ok]]
        src = index[ys[ok], xs[ok]]
        dst = index[ty[ok], tx[ok]]
        # edges point away from the goal; the source cell is the one nearer the goal
        w = step * gvd.resolution / limits.v_max * (rho[ys[ok], xs[ok]] + 1.0)
        rows.append(src)
        cols.append(dst)
        weights.append(w)

    graph = sp.csr_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(xs), len(xs)),
    )
    dist = csgraph.dijkstra(graph, directed=True, indices=int(index[goal.iy, goal.ix]))

    h = np.full((height, width), np.inf)
    h[ys, xs] = dist
    return HeuristicMap(h=h, goal=goal)


def snap_cell(gvd: GvdMap, mask: np.ndarray, point: Tuple[float, float], radius: float,
              r_c: float) -> Optional[CellIndex]:
    """Nearest cell of `mask` with clearance >= r_c whose centre lies within `radius` of point"""
    res = gvd.resolution
    fx = (point[0] - gvd.origin[0]) / res - 0.5
    fy = (point[1] - gvd.origin[1]) / res - 0.5
    k = int(math.ceil(radius / res)) + 1
    x0, x1 = max(int(math.floor(fx)) - k, 0), min(int(math.ceil(fx)) + k, gvd.width - 1)
    y0, y1 = max(int(math.floor(fy)) - k, 0), min(int(math.ceil(fy)) + k, gvd.height - 1)
    if x0 > x1 or y0 > y1:
        return None

    gy, gx = np.mgrid[y0:y1 + 1, x0:x1 + 1]
    dist = np.hypot(gx - fx, gy - fy) * res
    ok = mask[y0:y1 + 1, x0:x1 + 1] & (gvd.clearance_map()[y0:y1 + 1, x0:x1 + 1] >= r_c - 1e-9)
    ok &= dist <= radius + 1e-9
    if not ok.any():
        return None
    candidates = sorted(zip(dist[ok].tolist(), gx[ok].tolist(), gy[ok].tolist()))
    _, ix, iy = candidates[0]
    return CellIndex(int(ix), int(iy))


def plan(start: Pose, goal: Pose, gvd: GvdMap, corridor: VoronoiCorridor, field: VoronoiField,
         prims: PrimitiveSet, limits: SpeedLimits, heuristic: Optional[HeuristicMap] = None,
         heuristic_scale: float = DEFAULT_HEURISTIC_SCALE) -> SearchResult:
    """
    回廊に制限した状態格子A*探索

    f = g + scale·h2D。ゴール判定はセルと方位インデックスの完全一致。
    同じ f 値では h の小さい方、次に挿入順を優先する。
    """
    started = time.perf_counter()
    mode = SearchMode.FULL_SPACE if corridor.is_full_space else SearchMode.CORRIDOR
    r_c = prims.r_c
    search_mask = corridor.mask & ~gvd.obstacles

    start_cell = snap_cell(gvd, search_mask, (start.x, start.y), 2.0 * r_c, r_c)
    goal_cell = snap_cell(gvd, search_mask, (goal.x, goal.y), 2.0 * r_c, r_c)
    if start_cell is None:
        raise PreconditionError(f"Start ({start.x:.3f}, {start.y:.3f}) does not snap to a corridor cell")
    if goal_cell is None:
        raise PreconditionError(f"Goal ({goal.x:.3f}, {goal.y:.3f}) does not snap to a corridor cell")

    s0 = LatticeState(start_cell.ix, start_cell.iy, nearest_heading(start.theta))
    sg = LatticeState(goal_cell.ix, goal_cell.iy, nearest_heading(goal.theta))

    if heuristic is None or heuristic.goal != goal_cell:
        heuristic = build_h2d(gvd, corridor, goal_cell, field, limits)
    model = LatticeCostModel(gvd, field, prims, limits)
    by_heading = model.by_heading
    h_grid = heuristic.h * heuristic_scale

    if s0 == sg:
        result = SearchResult(path=[_cell_pose(gvd, s0)], states=[s0], cost=0.0,
                              expansions=0, graph_size=1, mode=mode)
        result.wall_time = time.perf_counter() - started
        return result

    if not np.isfinite(h_grid[s0.iy, s0.ix]):
        raise NoPathError("Start is disconnected from the goal inside the corridor", 0)

    counter = itertools.count()
    g: Dict[LatticeState, float] = {s0: 0.0}
    parent: Dict[LatticeState, Tuple[Optional[LatticeState], Optional[MotionPrimitive]]] = {s0: (None, None)}
    h0 = float(h_grid[s0.iy, s0.ix])
    open_list = [(h0, h0, next(counter), s0)]
    closed = set()
    expanded_cells = set()
    expansions = 0

    while open_list:
        _, _, _, state = heapq.heappop(open_list)
        if state in closed:
            continue
        if state == sg:
            break
        closed.add(state)
        expansions += 1
        expanded_cells.add((state.ix, state.iy))
        g_state = g[state]

        costs = model.heading_costs(state.ih, state.ix, state.iy)
        for prim, cost in zip(by_heading[state.ih], costs.tolist()):
            if math.isinf(cost):
                continue
            nx, ny = state.ix + prim.end_cell[0], state.iy + prim.end_cell[1]
            nxt = LatticeState(nx, ny, prim.end_heading)
            if nxt in closed:
                continue
            h = float(h_grid[ny, nx])
            if math.isinf(h):
                continue
            tentative = g_state + cost
            if tentative < g.get(nxt, math.inf):
                g[nxt] = tentative
                parent[nxt] = (state, prim)
                heapq.heappush(open_list, (tentative + h, h, next(counter), nxt))
    else:
        raise NoPathError("Open list exhausted without reaching the goal", expansions)

    states, path = _reconstruct(gvd, parent, sg)
    result = SearchResult(
        path=path,
        states=states,
        cost=g[sg],
        expansions=expansions,
        graph_size=len(g),
        mode=mode,
        expanded_cells=expanded_cells,
    )
    result.wall_time = time.perf_counter() - started
    logger.debug(
        f"Lattice search ({mode.value}): cost={result.cost:.4f}s expansions={expansions} "
        f"graph={result.graph_size} in {result.wall_time * 1000:.1f} ms"
    )
    return result


def _cell_pose(gvd: GvdMap, state: LatticeState) -> Pose:
    return Pose(
        gvd.origin[0] + (state.ix + 0.5) * gvd.resolution,
        gvd.origin[1] + (state.iy + 0.5) * gvd.resolution,
        heading_angle(state.ih),
    )


def _reconstruct(gvd: GvdMap, parent, goal: LatticeState) -> Tuple[List[LatticeState], List[Pose]]:
    chain = []
    node = goal
    while node is not None:
        prev, prim = parent[node]
        chain.append((node, prev, prim))
        node = prev
    chain.reverse()

    states = [entry[0] for entry in chain]
    path: List[Pose] = [_cell_pose(gvd, states[0])]
    for state, prev, prim in chain[1:]:
        cx = gvd.origin[0] + (prev.ix + 0.5) * gvd.resolution
        cy = gvd.origin[1] + (prev.iy + 0.5) * gvd.resolution
        # the first pose of each primitive is the previous junction
        for p in prim.poses[1:]:
            path.append(Pose(cx + p.x, cy + p.y, p.theta))
    return states, path
