#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import time
from typing import Dict, Optional

import numpy as np

from ..models import CellIndex, Pose, PreconditionError, SearchMode, VoronoiPath
from .base import SearchAlgorithm, elapsed_ms
from .corridor import (
    DEFAULT_ROUTE_STRETCH,
    build_corridor,
    full_space_corridor,
    near_optimal_voronoi_cells,
    shortest_voronoi_path,
)
from .field import build_field
from .lattice import build_h2d, snap_cell

logger = logging.getLogger(__name__)


class CorridorLatticePlanner(SearchAlgorithm):
    """
    ボロノイ回廊に探索空間を制限した状態格子プランナー

    route_stretch を与えると、最短ボロノイ経路に加えて所要時間が最短の
    (1 + route_stretch) 倍以内のボロノイ経路も回廊に含める。
    """

    def __init__(self, margin_cells: int = 0, route_stretch: Optional[float] = DEFAULT_ROUTE_STRETCH):
        super().__init__(SearchMode.CORRIDOR)
        self.margin_cells = margin_cells
        self.route_stretch = route_stretch
        self.voronoi_path: Optional[VoronoiPath] = None
        self.route_cells: Optional[np.ndarray] = None

    def _prepare(self, start: Pose, goal: Pose, timings: Dict[str, float]) -> None:
        gvd, r_c = self.gvd, self.prims.r_c

        t = time.perf_counter()
        start_cell = _snap_free(self, start)
        goal_cell = _snap_free(self, goal)
        self.voronoi_path = shortest_voronoi_path(gvd, start_cell, goal_cell, r_c)
        if self.route_stretch is not None:
            i1, i2 = self.voronoi_path.segments
            self.route_cells = near_optimal_voronoi_cells(
                gvd, self.voronoi_path.cells[i1], self.voronoi_path.cells[i2], r_c,
                self.limits, self.route_stretch)
        timings["voronoi_path"] = elapsed_ms(t)

        t = time.perf_counter()
        self.corridor = build_corridor(gvd, self.voronoi_path, margin_cells=self.margin_cells,
                                       extra=self.route_cells)
        timings["corridor"] = elapsed_ms(t)

        t = time.perf_counter()
        self.field = build_field(gvd, self.corridor, self.d_o_min, enabled=self.use_voronoi_field)
        timings["field"] = elapsed_ms(t)

        t = time.perf_counter()
        self.heuristic = build_h2d(gvd, self.corridor, goal_cell, self.field, self.limits)
        timings["heuristic"] = elapsed_ms(t)

        logger.info(
            f"Voronoi corridor: {self.corridor.area_cells} of {int((~gvd.obstacles).sum())} free cells "
            f"along a {len(self.voronoi_path)}-cell Voronoi path"
        )


class FullSpaceLatticePlanner(SearchAlgorithm):
    """自由空間全体を探索する従来の状態格子プランナー（比較用）"""

    def __init__(self):
        super().__init__(SearchMode.FULL_SPACE)

    def _prepare(self, start: Pose, goal: Pose, timings: Dict[str, float]) -> None:
        gvd = self.gvd

        t = time.perf_counter()
        goal_cell = _snap_free(self, goal)
        self.corridor = full_space_corridor(gvd)
        timings["corridor"] = elapsed_ms(t)

        t = time.perf_counter()
        self.field = build_field(gvd, self.corridor, self.d_o_min, enabled=self.use_voronoi_field)
        timings["field"] = elapsed_ms(t)

        t = time.perf_counter()
        self.heuristic = build_h2d(gvd, self.corridor, goal_cell, self.field, self.limits)
        timings["heuristic"] = elapsed_ms(t)


def _snap_free(algorithm: SearchAlgorithm, pose: Pose) -> CellIndex:
    r_c = algorithm.prims.r_c
    cell = snap_cell(algorithm.gvd, ~algorithm.gvd.obstacles, (pose.x, pose.y), 2.0 * r_c, r_c)
    if cell is None:
        raise PreconditionError(
            f"Pose ({pose.x:.3f}, {pose.y:.3f}) has no free cell with clearance >= {r_c:.3f} m nearby"
        )
    return cell


SEARCH_ALGORITHMS = {
    SearchMode.CORRIDOR: CorridorLatticePlanner,
    SearchMode.FULL_SPACE: FullSpaceLatticePlanner,
}
