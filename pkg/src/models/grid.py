from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import CellRangeError


class CellState(Enum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


class UnknownPolicy(Enum):
    OBSTACLE = "obstacle"
    FREE = "free"

    @classmethod
    def from_string(cls, value: str) -> "UnknownPolicy":
        mapping = {
            "obstacle": cls.OBSTACLE,
            "occupied": cls.OBSTACLE,
            "free": cls.FREE,
        }
        return mapping.get(str(value).lower(), cls.OBSTACLE)


@dataclass(frozen=True, order=True)
class CellIndex:
    ix: int
    iy: int

    def as_tuple(self) -> Tuple[int, int]:
        return (self.ix, self.iy)

    def __repr__(self) -> str:
        return f"({self.ix},{self.iy})"


@dataclass
class OccupancyGrid:
    """Row 0 of `cells` is the bottom row of the map (world y = origin_y).

    `cells` is indexed [iy, ix] and holds CellState values as uint8.
    """
    width: int
    height: int
    resolution: float
    origin: Tuple[float, float] = (0.0, 0.0)
    cells: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("Grid dimensions must be at least 1x1")
        if self.resolution <= 0:
            raise ValueError("Resolution must be positive")
        if self.cells is None:
            self.cells = np.full((self.height, self.width), CellState.FREE.value, dtype=np.uint8)
        else:
            self.cells = np.asarray(self.cells, dtype=np.uint8)
        if self.cells.shape != (self.height, self.width):
            raise ValueError(
                f"Cell array shape {self.cells.shape} does not match {self.height}x{self.width}"
            )
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    @classmethod
    def from_occupancy(cls, occupied: np.ndarray, resolution: float,
                       origin: Tuple[float, float] = (0.0, 0.0)) -> "OccupancyGrid":
        """Build a grid from a boolean [iy, ix] obstacle array"""
        occupied = np.asarray(occupied, dtype=bool)
        cells = np.where(occupied, CellState.OCCUPIED.value, CellState.FREE.value).astype(np.uint8)
        return cls(width=occupied.shape[1], height=occupied.shape[0],
                   resolution=resolution, origin=origin, cells=cells)

    def in_bounds(self, c: CellIndex) -> bool:
        return 0 <= c.ix < self.width and 0 <= c.iy < self.height

    def state(self, c: CellIndex) -> CellState:
        if not self.in_bounds(c):
            raise CellRangeError(f"Cell {c} outside {self.width}x{self.height} grid")
        return CellState(int(self.cells[c.iy, c.ix]))

    def set_state(self, c: CellIndex, state: CellState) -> None:
        if not self.in_bounds(c):
            raise CellRangeError(f"Cell {c} outside {self.width}x{self.height} grid")
        self.cells[c.iy, c.ix] = state.value

    def blocked_mask(self, treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE) -> np.ndarray:
        """Boolean [iy, ix] array of cells that are not traversable"""
        blocked = self.cells == CellState.OCCUPIED.value
        if treat_unknown_as == UnknownPolicy.OBSTACLE:
            blocked = blocked | (self.cells == CellState.UNKNOWN.value)
        return blocked

    def count(self, state: CellState) -> int:
        return int(np.count_nonzero(self.cells == state.value))

    @property
    def size_meters(self) -> Tuple[float, float]:
        return (self.width * self.resolution, self.height * self.resolution)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.width, self.height, self.resolution, self.origin, self.cells.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and self.origin == other.origin
            and np.array_equal(self.cells, other.cells)
        )

    def __repr__(self) -> str:
        return (f"OccupancyGrid({self.width}x{self.height}, res={self.resolution}, "
                f"occupied={self.count(CellState.OCCUPIED)})")


def world_to_cell(grid: OccupancyGrid, p: Tuple[float, float]) -> CellIndex:
    """Cell containing world point p (floor quantization)"""
    fx = (p[0] - grid.origin[0]) / grid.resolution
    fy = (p[1] - grid.origin[1]) / grid.resolution
    # Absorb representation error so that k*res lands in cell k
    ix = int(np.floor(fx + 1e-9))
    iy = int(np.floor(fy + 1e-9))
    if not (0 <= ix < grid.width and 0 <= iy < grid.height) or fx < -1e-9 or fy < -1e-9:
        raise CellRangeError(f"Point ({p[0]:.4f}, {p[1]:.4f}) lies outside the map")
    return CellIndex(ix, iy)


def cell_to_world(grid: OccupancyGrid, c: CellIndex) -> Tuple[float, float]:
    """World coordinates of the center of cell c"""
    if not grid.in_bounds(c):
        raise CellRangeError(f"Cell {c} outside {grid.width}x{grid.height} grid")
    return (
        grid.origin[0] + (c.ix + 0.5) * grid.resolution,
        grid.origin[1] + (c.iy + 0.5) * grid.resolution,
    )


def is_traversable(grid: OccupancyGrid, c: CellIndex,
                   treat_unknown_as: UnknownPolicy = UnknownPolicy.OBSTACLE) -> bool:
    state = grid.state(c)
    if state == CellState.OCCUPIED:
        return False
    if state == CellState.UNKNOWN:
        return treat_unknown_as == UnknownPolicy.FREE
    return True
