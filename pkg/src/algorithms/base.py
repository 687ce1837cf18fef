#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
import time
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple

from ..models import (
    GvdMap,
    HeuristicMap,
    Pose,
    PreconditionError,
    PrimitiveSet,
    SearchMode,
    SearchResult,
    SpeedLimits,
    VoronoiCorridor,
    VoronoiField,
)
from .lattice import DEFAULT_HEURISTIC_SCALE, plan

logger = logging.getLogger(__name__)


class SearchAlgorithm(ABC):
    """状態格子探索アルゴリズムの基底クラス"""

    def __init__(self, mode: SearchMode):
        self.mode = mode
        self.gvd: Optional[GvdMap] = None
        self.prims: Optional[PrimitiveSet] = None
        self.limits: Optional[SpeedLimits] = None
        self.result: Optional[SearchResult] = None

        # 探索の中間生成物（描画と検証用）
        self.corridor: Optional[VoronoiCorridor] = None
        self.field: Optional[VoronoiField] = None
        self.heuristic: Optional[HeuristicMap] = None
        self.timings: Dict[str, float] = {}
        self._started = 0.0

        self.d_o_min: Optional[float] = None
        self.use_voronoi_field = True
        self.heuristic_scale = DEFAULT_HEURISTIC_SCALE

    def setup(self, gvd: GvdMap, prims: PrimitiveSet, limits: SpeedLimits,
              d_o_min: Optional[float] = None, use_voronoi_field: bool = True,
              heuristic_scale: float = DEFAULT_HEURISTIC_SCALE) -> None:
        """アルゴリズムの初期設定"""
        self.gvd = gvd
        self.prims = prims
        self.limits = limits
        self.d_o_min = d_o_min if d_o_min is not None else 2.0 * prims.r_c
        self.use_voronoi_field = use_voronoi_field
        self.heuristic_scale = heuristic_scale
        self.result = None
        self.corridor = None
        self.field = None
        self.heuristic = None

    def prepare(self, start: Pose, goal: Pose) -> None:
        """回廊・ポテンシャル場・ヒューリスティックを構築する"""
        if self.gvd is None or self.prims is None or self.limits is None:
            raise PreconditionError("GVD, primitives and limits must be set before running the search")
        self.timings = {}
        self.heuristic = None
        self._started = time.perf_counter()
        self._prepare(start, goal, self.timings)

    def search(self, start: Pose, goal: Pose) -> SearchResult:
        """prepare() で構築した探索空間で状態格子 A* を実行する"""
        if self.heuristic is None:
            raise PreconditionError("prepare() must run before search()")

        t = time.perf_counter()
        result = plan(start, goal, self.gvd, self.corridor, self.field, self.prims, self.limits,
                      heuristic=self.heuristic, heuristic_scale=self.heuristic_scale)
        self.timings["search"] = elapsed_ms(t)

        result.wall_time = time.perf_counter() - self._started
        result.timings = {k: round(v, 3) for k, v in self.timings.items()}
        result.mode = self.mode
        self.result = result
        logger.debug(
            f"{self.mode.value} search: {result.expansions} expansions, graph size {result.graph_size}, "
            f"cost {result.cost:.4f}s, {result.planning_time_ms:.3f} ms"
        )
        return result

    @abstractmethod
    def _prepare(self, start: Pose, goal: Pose, timings: Dict[str, float]) -> None:
        """
        アルゴリズム固有の探索空間構築

        self.corridor, self.field, self.heuristic を設定し、
        各段階の所要時間[ms]を timings に記録する。
        """
        pass

    def validate_result(self, result: SearchResult) -> Tuple[bool, List[str]]:
        """
        探索結果の妥当性を検証

        Returns:
            (検証成功フラグ, エラーメッセージのリスト)
        """
        errors = []

        if self.corridor is not None:
            for state in result.states:
                if not self.corridor.contains(state.cell):
                    errors.append(f"State {state} lies outside the search corridor")
            for ix, iy in sorted(result.expanded_cells):
                if not self.corridor.mask[iy, ix]:
                    errors.append(f"Expanded cell ({ix},{iy}) lies outside the search corridor")

        for a, b in zip(result.path, result.path[1:]):
            step = a.distance_to(b)
            if step > self.gvd.resolution * 3.0:
                errors.append(f"Gap of {step:.3f} m between consecutive poses")

        if result.path and self.limits is not None:
            straight = result.path[0].distance_to(result.path[-1]) / self.limits.v_max
            if result.cost + 1e-9 < straight:
                errors.append(f"Cost {result.cost:.4f}s below straight-line time {straight:.4f}s")

        if not math.isfinite(result.cost):
            errors.append("Non-finite path cost")

        return len(errors) == 0, errors


def elapsed_ms(since: float) -> float:
    return (time.perf_counter() - since) * 1000.0
