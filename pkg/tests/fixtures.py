"""Small maps and scenario records shared by the test modules"""
from typing import Any, Dict, Optional

import numpy as np

from src.models import OccupancyGrid


def two_walls_grid(width: int = 40, height: int = 11, resolution: float = 0.1) -> OccupancyGrid:
    """Open strip bounded by obstacle rows at iy=0 and iy=height-1"""
    occupied = np.zeros((height, width), dtype=bool)
    occupied[0, :] = True
    occupied[-1, :] = True
    return OccupancyGrid.from_occupancy(occupied, resolution)


def walled_room_grid(width: int = 60, height: int = 30, resolution: float = 0.1,
                     divider: Optional[int] = None) -> OccupancyGrid:
    """Rectangle with a one-cell border; `divider` adds a full-height wall at that column"""
    occupied = np.zeros((height, width), dtype=bool)
    occupied[0, :] = occupied[-1, :] = True
    occupied[:, 0] = occupied[:, -1] = True
    if divider is not None:
        occupied[:, divider] = True
    return OccupancyGrid.from_occupancy(occupied, resolution)


def pillar_room_grid(width: int = 60, height: int = 31, resolution: float = 0.1) -> OccupancyGrid:
    """Walled room with a central block; the GVD loops around it and is symmetric about the middle row"""
    occupied = np.zeros((height, width), dtype=bool)
    occupied[0, :] = occupied[-1, :] = True
    occupied[:, 0] = occupied[:, -1] = True
    mid = height // 2
    occupied[mid - 4: mid + 5, width // 3: width - width // 3] = True
    return OccupancyGrid.from_occupancy(occupied, resolution)


def corner_grid(resolution: float = 0.1) -> OccupancyGrid:
    """80x80 walled map whose free space is an L-shaped corridor 20 cells wide (bottom row, then right column)"""
    occupied = np.zeros((80, 80), dtype=bool)
    occupied[0, :] = occupied[-1, :] = True
    occupied[:, 0] = occupied[:, -1] = True
    occupied[21:, :59] = True
    return OccupancyGrid.from_occupancy(occupied, resolution)


def random_grid(seed: int, width: int = 50, height: int = 50, density: float = 0.1,
                resolution: float = 0.1) -> OccupancyGrid:
    rng = np.random.default_rng(seed)
    return OccupancyGrid.from_occupancy(rng.random((height, width)) < density, resolution)


def small_maze_record(seed: int = 0, **overrides: Any) -> Dict[str, Any]:
    """3x3-room maze scenario that plans in well under a second per mode"""
    record = {
        "name": f"small_maze_{seed}",
        "maze_width": 60,
        "maze_height": 60,
        "corridor_width": 14,
        "maze_seed": seed,
        "resolution": 0.1,
        "seed": seed,
        "footprint": 0.2,
        "start": "room 0 0 0",
        "goal": "room -1 -1 0",
    }
    record.update(overrides)
    return record
