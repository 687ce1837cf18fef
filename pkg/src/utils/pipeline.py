#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..algorithms import SEARCH_ALGORITHMS, build_gvd, fit_spline, generate_primitives, plan_velocity, smooth
from ..algorithms.base import SearchAlgorithm
from ..algorithms.corridor import DEFAULT_ROUTE_STRETCH
from ..algorithms.gvd import point_clearance
from ..algorithms.lattice import DEFAULT_HEURISTIC_SCALE
from ..algorithms.smoother import build_reference
from ..algorithms.trajectory import compute_metrics
from ..data.map_loader import load_map
from ..data.maze_generator import generate_maze
from ..data.primitive_loader import load_primitives
from ..models import (
    GvdMap,
    OccupancyGrid,
    PathMetrics,
    PathSpline,
    PipelineStageError,
    PlannerError,
    Pose,
    PreconditionError,
    PrimitiveConfig,
    PrimitiveFileError,
    PrimitiveSet,
    ReferenceIntegrityError,
    ReferencePath,
    Scenario,
    SearchIntegrityError,
    SearchMode,
    SearchResult,
    SmoothedPath,
    SmootherConfig,
    UnknownPolicy,
    VelocityInfeasibleError,
    VelocityProfile,
)


class PipelineStatus(Enum):
    """Pipeline status enumeration"""
    IDLE = "idle"
    RUNNING = "running"
    COMPLETED = "completed"
    ERROR = "error"


STAGES = ("map", "gvd", "primitives", "corridor", "search", "smoothing", "trajectory", "safety")


@dataclass
class PipelineConfig:
    """Settings shared by every scenario a pipeline runs"""
    treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE
    primitive_config: PrimitiveConfig = field(default_factory=PrimitiveConfig)
    primitive_file: Optional[str] = None
    heuristic_scale: float = DEFAULT_HEURISTIC_SCALE
    corridor_margin_cells: int = 0
    # None keeps only the shortest Voronoi route
    route_stretch: Optional[float] = DEFAULT_ROUTE_STRETCH
    eps_abs: float = 1e-6
    max_iter: int = 4000
    spacing: float = 0.1
    ds: float = 0.1
    bc_type: str = "natural"
    # clearance slack for smoothed vertices, None means res/√2
    safety_tolerance: Optional[float] = None

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "PipelineConfig":
        """Build from the `map`, `primitives`, `lattice`, `smoother` and `trajectory` config sections"""
        prim = config.get("primitives", {})
        lattice = config.get("lattice", {})
        smoother = config.get("smoother", {})
        trajectory = config.get("trajectory", {})
        stretch = lattice.get("route_stretch", DEFAULT_ROUTE_STRETCH)
        return cls(
            treat_unknown_as=UnknownPolicy.from_string(config.get("map", {}).get("treat_unknown_as", "obstacle")),
            primitive_config=PrimitiveConfig(
                straight_lengths=tuple(prim.get("straight_lengths", (1, 3))),
                turn_scale=int(prim.get("turn_scale", 2)),
                max_curvature=float(prim.get("max_curvature", 10.0)),
                sample_spacing=float(prim.get("sample_spacing", 0.0)),
                allow_backward=bool(prim.get("allow_backward", False)),
            ),
            primitive_file=prim.get("file"),
            heuristic_scale=float(lattice.get("heuristic_scale", DEFAULT_HEURISTIC_SCALE)),
            corridor_margin_cells=int(lattice.get("corridor_margin_cells", 0)),
            route_stretch=None if stretch is None else float(stretch),
            eps_abs=float(smoother.get("eps_abs", 1e-6)),
            max_iter=int(smoother.get("max_iter", 4000)),
            spacing=float(smoother.get("spacing", 0.1)),
            ds=float(trajectory.get("ds", 0.1)),
            bc_type=str(trajectory.get("bc_type", "natural")),
        )


@dataclass
class PlanArtifacts:
    """Everything produced by one end-to-end run (used for rendering and export)"""
    scenario: Scenario
    grid: OccupancyGrid
    gvd: GvdMap
    primitives: PrimitiveSet
    algorithm: SearchAlgorithm
    search: SearchResult
    local_path: List[Pose]
    reference: ReferencePath
    smoothed: SmoothedPath
    spline: PathSpline
    profile: VelocityProfile
    metrics: PathMetrics
    stage_times: Dict[str, float] = field(default_factory=dict)

    @property
    def corridor(self):
        return self.algorithm.corridor

    @property
    def voronoi_field(self):
        return self.algorithm.field

    @property
    def voronoi_path(self):
        return getattr(self.algorithm, "voronoi_path", None)

    def as_tuple(self) -> Tuple[SearchResult, SmoothedPath, VelocityProfile, PathMetrics]:
        return (self.search, self.smoothed, self.profile, self.metrics)


class PlanningPipeline:
    """
    End-to-end planner: map -> GVD -> corridor -> field -> lattice search -> smoothing -> trajectory

    Maps, GVDs and primitive sets are cached per source so that repeated
    runs only time the planning stages. Errors raised inside a stage are
    re-raised as PipelineStageError carrying the stage name.
    """

    def __init__(self, config: Optional[PipelineConfig] = None):
        self.config = config or PipelineConfig()
        self.status = PipelineStatus.IDLE
        self.execution_log: List[Dict[str, Any]] = []
        self.logger = logging.getLogger(__name__)

        self.algorithm_classes = dict(SEARCH_ALGORITHMS)
        self._grids: Dict[Any, OccupancyGrid] = {}
        self._gvds: Dict[Any, GvdMap] = {}
        self._primitives: Dict[Tuple[float, float], PrimitiveSet] = {}

    def run(self, scenario: Scenario) -> PlanArtifacts:
        """Run every stage for one scenario"""
        self.status = PipelineStatus.RUNNING
        stage_times: Dict[str, float] = {}
        try:
            grid = self._stage("map", scenario, stage_times, self.load_grid, scenario)
            gvd = self._stage("gvd", scenario, stage_times, self.gvd_for, scenario)
            prims = self._stage("primitives", scenario, stage_times, self.primitives_for,
                                grid.resolution, scenario.footprint)

            algorithm = self._create_algorithm(scenario)
            algorithm.setup(gvd, prims, scenario.limits, d_o_min=scenario.field_threshold,
                            use_voronoi_field=scenario.use_voronoi_field,
                            heuristic_scale=self.config.heuristic_scale)
            self._stage("corridor", scenario, stage_times, algorithm.prepare, scenario.start, scenario.goal)
            result = self._stage("search", scenario, stage_times, algorithm.search, scenario.start, scenario.goal)

            local_path = result.path
            if scenario.local_length is not None:
                local_path = truncate_path(result.path, scenario.local_length)

            reference, smoothed = self._stage("smoothing", scenario, stage_times, self._smooth,
                                              scenario, local_path, gvd, prims.r_c)
            spline, profile, metrics = self._stage("trajectory", scenario, stage_times, self._trajectory,
                                                   scenario, smoothed, gvd)
            self._stage("safety", scenario, stage_times, self.check_safety,
                        smoothed, profile, gvd, algorithm, result)
        except PipelineStageError:
            self.status = PipelineStatus.ERROR
            raise

        self.status = PipelineStatus.COMPLETED
        self.logger.info(
            f"Scenario '{scenario.name}' ({scenario.mode.value}): cost {result.cost:.3f}s, "
            f"{result.expansions} expansions, S={metrics.S:.2f} m, T={metrics.T:.2f} s"
        )
        return PlanArtifacts(
            scenario=scenario,
            grid=grid,
            gvd=gvd,
            primitives=prims,
            algorithm=algorithm,
            search=result,
            local_path=local_path,
            reference=reference,
            smoothed=smoothed,
            spline=spline,
            profile=profile,
            metrics=metrics,
            stage_times=stage_times,
        )

    def load_grid(self, scenario: Scenario) -> OccupancyGrid:
        key = self._map_key(scenario)
        if key not in self._grids:
            if scenario.map_path:
                grid = load_map(scenario.map_path)
            else:
                m = scenario.maze
                grid = generate_maze(m.width, m.height, m.corridor_width, m.seed,
                                     resolution=m.resolution, wall_thickness=m.wall_thickness)
            self._grids[key] = grid
        return self._grids[key]

    def gvd_for(self, scenario: Scenario) -> GvdMap:
        """GVD of the scenario's map (excluded from the reported planning time)"""
        key = self._map_key(scenario)
        if key not in self._gvds:
            self._gvds[key] = build_gvd(self.load_grid(scenario), self.config.treat_unknown_as)
        return self._gvds[key]

    def primitives_for(self, resolution: float, footprint: float) -> PrimitiveSet:
        key = (resolution, footprint)
        if key not in self._primitives:
            if self.config.primitive_file:
                prims = load_primitives(self.config.primitive_file)
                if not math.isclose(prims.resolution, resolution) or not math.isclose(prims.footprint, footprint):
                    raise PrimitiveFileError(
                        f"Primitive file was generated for res={prims.resolution}, footprint={prims.footprint}; "
                        f"scenario needs res={resolution}, footprint={footprint}"
                    )
            else:
                prims = generate_primitives(resolution, footprint, self.config.primitive_config)
            self._primitives[key] = prims
        return self._primitives[key]

    def check_safety(self, smoothed: SmoothedPath, profile: VelocityProfile, gvd: GvdMap,
                     algorithm: SearchAlgorithm, result: SearchResult) -> None:
        """
        Re-check stage contracts on the final outputs

        The search result must pass the algorithm's own validation. Smoothed
        vertices must stay inside their boxes and keep r_c clearance measured
        at the vertex itself. Reference clearances are taken at the centre of
        the vertex's cell, up to res/√2 away, so that is the default slack.
        The profile must respect every limit.
        """
        ok, errors = algorithm.validate_result(result)
        if not ok:
            raise SearchIntegrityError(f"Search result failed validation ({len(errors)} issues): {errors[0]}")

        ref = smoothed.reference
        tol = self.config.safety_tolerance
        if tol is None:
            tol = gvd.resolution / math.sqrt(2.0)

        deviation = np.abs(smoothed.vertices - ref.vertices)
        outside = np.flatnonzero(np.any(deviation > ref.margins[:, None] + 1e-6, axis=1))
        if outside.size:
            raise ReferenceIntegrityError(f"Smoothed vertex {int(outside[0])} left its box constraint")

        clearance = point_clearance(gvd, smoothed.vertices)
        short = np.flatnonzero(clearance < ref.r_c - tol - 1e-6)
        if short.size:
            i = int(short[0])
            raise ReferenceIntegrityError(
                f"Smoothed vertex {i} has clearance {clearance[i]:.3f} m < r_c={ref.r_c:.3f} m"
            )

        cap = profile.speed_cap
        if np.any(profile.v > cap + 1e-9):
            raise VelocityInfeasibleError("profile exceeds the speed limit", "start")
        accel = np.abs(np.diff(profile.v ** 2)) - 2.0 * profile.a_max * np.diff(profile.s)
        if np.any(accel > 1e-9):
            raise VelocityInfeasibleError("profile exceeds the acceleration limit", "start")

    def get_execution_log(self) -> List[Dict[str, Any]]:
        return self.execution_log.copy()

    def clear_cache(self) -> None:
        self._grids.clear()
        self._gvds.clear()
        self._primitives.clear()

    def get_statistics(self) -> Dict[str, Any]:
        """Per-stage success counts and mean durations"""
        stats: Dict[str, Any] = {"runs": len(self.execution_log), "status": self.status.value}
        for stage in STAGES:
            entries = [e for e in self.execution_log if e["stage"] == stage]
            if not entries:
                continue
            ok = [e["time_ms"] for e in entries if e["status"] == "success"]
            stats[stage] = {
                "count": len(entries),
                "failures": len(entries) - len(ok),
                "mean_time_ms": round(float(np.mean(ok)), 3) if ok else 0.0,
            }
        return stats

    @staticmethod
    def _map_key(scenario: Scenario):
        if scenario.map_path:
            return scenario.map_path
        if scenario.maze is None:
            raise PreconditionError(f"Scenario '{scenario.name}' has no map")
        return scenario.maze

    def _create_algorithm(self, scenario: Scenario) -> SearchAlgorithm:
        algorithm_class = self.algorithm_classes[scenario.mode]
        if scenario.mode == SearchMode.CORRIDOR:
            return algorithm_class(margin_cells=self.config.corridor_margin_cells,
                                   route_stretch=self.config.route_stretch)
        return algorithm_class()

    def _smooth(self, scenario: Scenario, path: List[Pose], gvd: GvdMap,
                r_c: float) -> Tuple[ReferencePath, SmoothedPath]:
        cfg = SmootherConfig(
            w_s=scenario.w_s,
            w_r=scenario.w_r,
            eps_abs=self.config.eps_abs,
            max_iter=self.config.max_iter,
            spacing=self.config.spacing,
            allow_zero_reference_weight=not scenario.use_voronoi_field,
        )
        reference = build_reference(path, gvd, r_c, spacing=cfg.spacing)
        return reference, smooth(reference, cfg)

    def _trajectory(self, scenario: Scenario, smoothed: SmoothedPath,
                    gvd: GvdMap) -> Tuple[PathSpline, VelocityProfile, PathMetrics]:
        spline = fit_spline(smoothed, bc_type=self.config.bc_type)
        profile = plan_velocity(spline, scenario.limits, scenario.v_start, scenario.v_end, ds=self.config.ds)
        metrics = compute_metrics(spline, profile, ds=self.config.ds, gvd=gvd)
        return spline, profile, metrics

    def _stage(self, stage: str, scenario: Scenario, stage_times: Dict[str, float],
               func: Callable, *args):
        started = time.perf_counter()
        try:
            value = func(*args)
        except (PlannerError, ValueError, OSError) as e:
            elapsed = (time.perf_counter() - started) * 1000.0
            self.execution_log.append({
                "scenario": scenario.name,
                "mode": scenario.mode.value,
                "stage": stage,
                "time_ms": round(elapsed, 3),
                "status": "error",
                "error": str(e),
            })
            self.logger.error(f"Stage '{stage}' failed for scenario '{scenario.name}': {e}")
            raise PipelineStageError(stage, e) from e

        elapsed = (time.perf_counter() - started) * 1000.0
        stage_times[stage] = round(elapsed, 3)
        self.execution_log.append({
            "scenario": scenario.name,
            "mode": scenario.mode.value,
            "stage": stage,
            "time_ms": round(elapsed, 3),
            "status": "success",
        })
        return value


def truncate_path(path: List[Pose], length: float) -> List[Pose]:
    """Leading part of a pose list with arc length `length` (local planner mode)"""
    if length <= 0:
        raise ValueError("local_length must be positive")
    out = [path[0]]
    travelled = 0.0
    for a, b in zip(path, path[1:]):
        step = a.distance_to(b)
        if travelled + step >= length:
            t = (length - travelled) / step if step > 0 else 0.0
            out.append(Pose(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), b.theta))
            return out
        travelled += step
        out.append(b)
    return out


def plan_end_to_end(scenario: Scenario, pipeline: Optional[PlanningPipeline] = None
                    ) -> Tuple[SearchResult, SmoothedPath, VelocityProfile, PathMetrics]:
    """Run the full pipeline for one scenario"""
    pipeline = pipeline or PlanningPipeline()
    return pipeline.run(scenario).as_tuple()
