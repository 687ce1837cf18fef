from dataclasses import dataclass, field
from typing import List

import numpy as np

from .grid import CellIndex, OccupancyGrid

# "Infinite" squared distance for maps without obstacle cells
INF_SQ_DIST = np.iinfo(np.int64).max
NO_OBSTACLE = -1


@dataclass
class GvdMap:
    """Per-cell squared obstacle distance, nearest obstacle and Voronoi flag.

    All arrays are indexed [iy, ix]. `nearest_x`/`nearest_y` hold NO_OBSTACLE
    when the map has no obstacle cells.
    """
    grid: OccupancyGrid
    sq_dist: np.ndarray = field(repr=False)
    nearest_x: np.ndarray = field(repr=False)
    nearest_y: np.ndarray = field(repr=False)
    is_voronoi: np.ndarray = field(repr=False)
    obstacles: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height

    @property
    def resolution(self) -> float:
        return self.grid.resolution

    @property
    def origin(self):
        return self.grid.origin

    def clearance_map(self) -> np.ndarray:
        """Clearance in meters for every cell (inf without obstacles)"""
        finite = self.sq_dist != INF_SQ_DIST
        out = np.full(self.sq_dist.shape, np.inf)
        out[finite] = np.sqrt(self.sq_dist[finite].astype(float)) * self.resolution
        return out

    def voronoi_cells(self) -> List[CellIndex]:
        ys, xs = np.nonzero(self.is_voronoi)
        return [CellIndex(int(x), int(y)) for x, y in zip(xs, ys)]

    def same_cells(self, other: "GvdMap") -> bool:
        return (
            np.array_equal(self.sq_dist, other.sq_dist)
            and np.array_equal(self.is_voronoi, other.is_voronoi)
        )

    def __repr__(self) -> str:
        return (f"GvdMap({self.width}x{self.height}, "
                f"voronoi={int(np.count_nonzero(self.is_voronoi))})")


@dataclass
class MapDelta:
    newly_occupied: List[CellIndex] = field(default_factory=list)
    newly_freed: List[CellIndex] = field(default_factory=list)

    def __post_init__(self):
        self.newly_occupied = [c if isinstance(c, CellIndex) else CellIndex(*c) for c in self.newly_occupied]
        self.newly_freed = [c if isinstance(c, CellIndex) else CellIndex(*c) for c in self.newly_freed]
        if set(self.newly_occupied) & set(self.newly_freed):
            raise ValueError("A cell cannot be both occupied and freed in one delta")

    def is_empty(self) -> bool:
        return not self.newly_occupied and not self.newly_freed
