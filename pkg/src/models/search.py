from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Set, Tuple

import numpy as np

from .grid import CellIndex
from .primitive import Pose


class SearchMode(Enum):
    CORRIDOR = "corridor"
    FULL_SPACE = "full"

    @classmethod
    def from_string(cls, value: str) -> "SearchMode":
        mapping = {
            "corridor": cls.CORRIDOR,
            "full": cls.FULL_SPACE,
            "full-space": cls.FULL_SPACE,
            "full_space": cls.FULL_SPACE,
        }
        key = str(value).lower()
        if key not in mapping:
            raise ValueError(f"Unknown search mode: {value}")
        return mapping[key]


@dataclass(frozen=True, order=True)
class LatticeState:
    ix: int
    iy: int
    ih: int

    @property
    def cell(self) -> CellIndex:
        return CellIndex(self.ix, self.iy)


@dataclass
class SpeedLimits:
    v_max: float = 1.5
    omega_max: float = 1.0
    a_max: float = 1.0

    def __post_init__(self):
        if self.v_max <= 0 or self.omega_max <= 0:
            raise ValueError("v_max and omega_max must be positive")
        if self.a_max <= 0:
            raise ValueError("a_max must be positive")


@dataclass
class HeuristicMap:
    """h values in seconds, +inf outside the corridor"""
    h: np.ndarray = field(repr=False)
    goal: CellIndex = None

    def at(self, c: CellIndex) -> float:
        return float(self.h[c.iy, c.ix])


@dataclass
class SearchResult:
    path: List[Pose] = field(default_factory=list)
    states: List[LatticeState] = field(default_factory=list)
    cost: float = 0.0
    expansions: int = 0
    graph_size: int = 0
    wall_time: float = 0.0
    mode: SearchMode = SearchMode.CORRIDOR
    expanded_cells: Set[Tuple[int, int]] = field(default_factory=set, repr=False)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def planning_time_ms(self) -> float:
        """Voronoi path + corridor + field + heuristic + search, GVD excluded"""
        if self.timings:
            return sum(self.timings.values())
        return self.wall_time * 1000.0

    @property
    def path_length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.path, self.path[1:]))

    def to_row(self) -> Dict[str, float]:
        return {
            "expansions": self.expansions,
            "planning_time_ms": round(self.planning_time_ms, 3),
            "graph_size": self.graph_size,
            "path_cost": self.cost,
        }
