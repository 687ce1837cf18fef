#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..models import MazeParameterError, OccupancyGrid

logger = logging.getLogger(__name__)

MIN_MAZE_CELLS = 20
MIN_CORRIDOR_WIDTH = 3


@dataclass(frozen=True)
class MazeLayout:
    """Room lattice of a generated maze.

    Rooms are corridor_width x corridor_width squares separated by walls of
    wall_thickness cells; room (i, j) starts at cell
    (wall + i*(corridor_width + wall), wall + j*(corridor_width + wall)).
    """
    width: int
    height: int
    corridor_width: int
    wall_thickness: int
    resolution: float

    @property
    def pitch(self) -> int:
        return self.corridor_width + self.wall_thickness

    @property
    def rooms_x(self) -> int:
        return (self.width - self.wall_thickness) // self.pitch

    @property
    def rooms_y(self) -> int:
        return (self.height - self.wall_thickness) // self.pitch

    def room_origin(self, i: int, j: int) -> Tuple[int, int]:
        return (self.wall_thickness + i * self.pitch, self.wall_thickness + j * self.pitch)

    def room_center(self, i: int, j: int) -> Tuple[float, float]:
        """World coordinates of the centre of room (i, j)"""
        x0, y0 = self.room_origin(i, j)
        half = self.corridor_width / 2.0
        return ((x0 + half) * self.resolution, (y0 + half) * self.resolution)

    def internal_walls(self) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
        walls = []
        for j in range(self.rooms_y):
            for i in range(self.rooms_x):
                if i + 1 < self.rooms_x:
                    walls.append(((i, j), (i + 1, j)))
                if j + 1 < self.rooms_y:
                    walls.append(((i, j), (i, j + 1)))
        return walls


def maze_layout(width: int, height: int, corridor_width: int = 14, wall_thickness: int = 4,
                resolution: float = 0.1) -> MazeLayout:
    if width < MIN_MAZE_CELLS or height < MIN_MAZE_CELLS:
        raise MazeParameterError(f"Maze must be at least {MIN_MAZE_CELLS}x{MIN_MAZE_CELLS} cells, got {width}x{height}")
    if corridor_width < MIN_CORRIDOR_WIDTH:
        raise MazeParameterError(
            f"corridor_width={corridor_width} is too narrow (minimum {MIN_CORRIDOR_WIDTH} cells)"
        )
    if wall_thickness < 1:
        raise MazeParameterError("wall_thickness must be at least 1 cell")
    if resolution <= 0:
        raise MazeParameterError("resolution must be positive")

    layout = MazeLayout(width, height, corridor_width, wall_thickness, resolution)
    if layout.rooms_x < 2 or layout.rooms_y < 2:
        raise MazeParameterError(
            f"corridor_width={corridor_width} leaves fewer than 2x2 rooms on a {width}x{height} map"
        )
    return layout


def generate_maze(width: int, height: int, corridor_width: int = 14, seed: int = 0,
                  resolution: float = 0.1, wall_thickness: int = 4,
                  loop_fraction: float = 0.1) -> OccupancyGrid:
    """
    迷路の占有格子を生成する

    部屋の格子上でランダム深さ優先探索により完全迷路を掘り、
    残った内壁の loop_fraction を取り除いてループを作る。同じ seed なら同じ地図になる。
    """
    layout = maze_layout(width, height, corridor_width, wall_thickness, resolution)
    if not 0.0 <= loop_fraction <= 1.0:
        raise MazeParameterError("loop_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)

    occupied = np.ones((height, width), dtype=bool)
    for j in range(layout.rooms_y):
        for i in range(layout.rooms_x):
            _open_room(occupied, layout, i, j)

    opened = set()
    visited = np.zeros((layout.rooms_y, layout.rooms_x), dtype=bool)
    stack = [(0, 0)]
    visited[0, 0] = True
    while stack:
        i, j = stack[-1]
        candidates = [
            (i + di, j + dj)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= i + di < layout.rooms_x and 0 <= j + dj < layout.rooms_y and not visited[j + dj, i + di]
        ]
        if not candidates:
            stack.pop()
            continue
        nxt = candidates[int(rng.integers(len(candidates)))]
        wall = (min((i, j), nxt), max((i, j), nxt))
        _open_wall(occupied, layout, *wall)
        opened.add(wall)
        visited[nxt[1], nxt[0]] = True
        stack.append(nxt)

    remaining = [w for w in layout.internal_walls() if w not in opened]
    removals = int(round(loop_fraction * len(remaining)))
    if removals:
        for k in sorted(rng.choice(len(remaining), size=removals, replace=False).tolist()):
            _open_wall(occupied, layout, *remaining[k])

    grid = OccupancyGrid.from_occupancy(occupied, resolution)
    logger.info(
        f"Generated {width}x{height} maze (seed={seed}, rooms={layout.rooms_x}x{layout.rooms_y}, "
        f"loops={removals}, free={1.0 - occupied.mean():.3f})"
    )
    return grid


def _open_room(occupied: np.ndarray, layout: MazeLayout, i: int, j: int) -> None:
    x0, y0 = layout.room_origin(i, j)
    cw = layout.corridor_width
    occupied[y0:y0 + cw, x0:x0 + cw] = False


def _open_wall(occupied: np.ndarray, layout: MazeLayout, a: Tuple[int, int], b: Tuple[int, int]) -> None:
    x0, y0 = layout.room_origin(*a)
    cw, wt = layout.corridor_width, layout.wall_thickness
    if b[0] != a[0]:
        occupied[y0:y0 + cw, x0 + cw:x0 + cw + wt] = False
    else:
        occupied[y0 + cw:y0 + cw + wt, x0:x0 + cw] = False
