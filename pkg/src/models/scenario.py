import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional

import numpy as np

from .primitive import Pose
from .search import SearchMode, SpeedLimits


@dataclass(frozen=True)
class MazeSpec:
    """Parameters for a generated maze map (used when no map file is given)"""
    width: int = 200
    height: int = 200
    corridor_width: int = 14
    seed: int = 0
    resolution: float = 0.1
    wall_thickness: int = 4


@dataclass
class Scenario:
    name: str
    start: Pose
    goal: Pose
    map_path: Optional[str] = None
    maze: Optional[MazeSpec] = None
    limits: SpeedLimits = field(default_factory=SpeedLimits)
    footprint: float = 0.4
    d_o_min: Optional[float] = None
    w_s: float = 10.0
    w_r: float = 1.0
    seed: int = 0
    mode: SearchMode = SearchMode.CORRIDOR
    use_voronoi_field: bool = True
    local_length: Optional[float] = None
    v_start: float = 0.0
    v_end: float = 0.0

    @property
    def r_c(self) -> float:
        return self.footprint * math.sqrt(2.0)

    @property
    def field_threshold(self) -> float:
        return self.d_o_min if self.d_o_min is not None else 2.0 * self.r_c

    def with_mode(self, mode: SearchMode) -> "Scenario":
        data = dict(self.__dict__)
        data["mode"] = mode
        return Scenario(**data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "map": self.map_path,
            "maze": asdict(self.maze) if self.maze else None,
            "start": list(self.start.as_tuple()),
            "goal": list(self.goal.as_tuple()),
            "v_max": self.limits.v_max,
            "omega_max": self.limits.omega_max,
            "a_max": self.limits.a_max,
            "footprint": self.footprint,
            "r_c": self.r_c,
            "d_o_min": self.field_threshold,
            "w_s": self.w_s,
            "w_r": self.w_r,
            "seed": self.seed,
            "mode": self.mode.value,
            "use_voronoi_field": self.use_voronoi_field,
            "local_length": self.local_length,
        }


@dataclass
class BenchmarkReport:
    """Per-run rows for the search, smoothing and trajectory tables"""
    search_rows: List[Dict[str, Any]] = field(default_factory=list)
    smoothing_rows: List[Dict[str, Any]] = field(default_factory=list)
    trajectory_rows: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def run_count(self) -> int:
        return len(self.search_rows)

    def is_empty(self) -> bool:
        return not self.search_rows and not self.failures

    def smoothing_stats(self) -> Dict[str, float]:
        """mean/max/min/std of smoothing times in milliseconds"""
        times = [r["smoothing_time_ms"] for r in self.smoothing_rows if r.get("status") != "failed"]
        if not times:
            return {"mean": 0.0, "max": 0.0, "min": 0.0, "std": 0.0}
        arr = np.asarray(times, dtype=float)
        return {
            "mean": round(float(arr.mean()), 3),
            "max": round(float(arr.max()), 3),
            "min": round(float(arr.min()), 3),
            "std": round(float(arr.std()), 3),
        }

    def planning_time_stats(self) -> Dict[str, Dict[str, float]]:
        stats: Dict[str, Dict[str, float]] = {}
        for mode in {r["mode"] for r in self.search_rows}:
            arr = np.asarray([r["planning_time_ms"] for r in self.search_rows if r["mode"] == mode], dtype=float)
            stats[mode] = {
                "mean": round(float(arr.mean()), 3),
                "max": round(float(arr.max()), 3),
                "min": round(float(arr.min()), 3),
                "std": round(float(arr.std()), 3),
            }
        return stats

    def paired_reductions(self) -> List[Dict[str, Any]]:
        """Corridor vs full-space comparison per (scenario, repetition)"""
        by_key: Dict[Any, Dict[str, Dict[str, Any]]] = {}
        for row in self.search_rows:
            by_key.setdefault((row["scenario"], row["repetition"]), {})[row["mode"]] = row

        pairs = []
        for (scenario, rep), modes in sorted(by_key.items()):
            corridor = modes.get(SearchMode.CORRIDOR.value)
            full = modes.get(SearchMode.FULL_SPACE.value)
            if corridor is None or full is None:
                continue
            pairs.append({
                "scenario": scenario,
                "repetition": rep,
                "expansions_corridor": corridor["expansions"],
                "expansions_full": full["expansions"],
                "expansion_reduction_pct": _reduction(corridor["expansions"], full["expansions"]),
                "graph_size_reduction_pct": _reduction(corridor["graph_size"], full["graph_size"]),
                # summation order differs between the two searches
                "equal_cost": math.isclose(corridor["path_cost"], full["path_cost"], rel_tol=1e-9),
            })
        return pairs

    def mean_expansion_reduction(self) -> float:
        pairs = self.paired_reductions()
        if not pairs:
            return 0.0
        return float(np.mean([p["expansion_reduction_pct"] for p in pairs]))

    def mean_graph_size_reduction(self) -> float:
        pairs = self.paired_reductions()
        if not pairs:
            return 0.0
        return float(np.mean([p["graph_size_reduction_pct"] for p in pairs]))


def _reduction(corridor: float, full: float) -> float:
    if full == 0:
        return 0.0
    return round(100.0 * (full - corridor) / full, 3)
