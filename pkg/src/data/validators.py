#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from pathlib import Path
from typing import List, Optional

from ..models import CellRangeError, CellState, OccupancyGrid, Pose, Scenario, is_traversable, world_to_cell


class ScenarioValidator:
    """Validation of scenarios and maps before planning"""

    @staticmethod
    def validate_scenarios(scenarios: List[Scenario]) -> List[str]:
        """
        Validate a scenario list
        Returns: List of error messages
        """
        errors = []

        names = [sc.name for sc in scenarios]
        duplicates = ScenarioValidator._find_duplicates(names)
        if duplicates:
            errors.append(f"Duplicate scenario names: {duplicates}")

        for scenario in scenarios:
            errors.extend(ScenarioValidator.validate_scenario(scenario))
        return errors

    @staticmethod
    def validate_scenario(scenario: Scenario, grid: Optional[OccupancyGrid] = None) -> List[str]:
        """
        Validate a single scenario, optionally against its loaded map
        Returns: List of error messages
        """
        errors = []
        prefix = f"Scenario '{scenario.name}'"

        if not scenario.name or not scenario.name.strip():
            errors.append(f"{prefix}: Name is empty")

        if scenario.map_path is None and scenario.maze is None:
            errors.append(f"{prefix}: No map file or maze given")
        elif scenario.map_path is not None and not Path(scenario.map_path).exists():
            errors.append(f"{prefix}: Map file not found: {scenario.map_path}")

        if scenario.footprint <= 0:
            errors.append(f"{prefix}: Footprint half-width must be positive")
        if scenario.d_o_min is not None and scenario.d_o_min <= 0:
            errors.append(f"{prefix}: d_o_min must be positive")
        if scenario.w_s <= 0:
            errors.append(f"{prefix}: Smoothness weight w_s must be positive")
        if scenario.w_r < 0:
            errors.append(f"{prefix}: Reference weight w_r cannot be negative")
        elif scenario.w_r == 0 and scenario.use_voronoi_field:
            errors.append(f"{prefix}: w_r = 0 is only allowed with use_voronoi_field disabled")
        if scenario.local_length is not None and scenario.local_length <= 0:
            errors.append(f"{prefix}: local_length must be positive")
        if scenario.v_start < 0 or scenario.v_end < 0:
            errors.append(f"{prefix}: Boundary speeds cannot be negative")
        if scenario.v_start > scenario.limits.v_max or scenario.v_end > scenario.limits.v_max:
            errors.append(f"{prefix}: Boundary speeds exceed v_max")

        if grid is not None:
            errors.extend(ScenarioValidator.validate_poses(scenario, grid))
        return errors

    @staticmethod
    def validate_poses(scenario: Scenario, grid: OccupancyGrid) -> List[str]:
        """Start and goal must lie inside the map on traversable cells"""
        errors = []
        for label, pose in (("Start", scenario.start), ("Goal", scenario.goal)):
            error = ScenarioValidator._check_pose(pose, grid)
            if error:
                errors.append(f"Scenario '{scenario.name}': {label} {error}")
        return errors

    @staticmethod
    def validate_map(grid: OccupancyGrid) -> List[str]:
        """
        Validate a loaded map
        Returns: List of warning messages
        """
        warnings = []
        free = grid.count(CellState.FREE)
        if free == 0:
            warnings.append("Map has no free cells")
        if grid.count(CellState.OCCUPIED) == 0:
            warnings.append("Map has no obstacle cells; the Voronoi diagram is empty")
        unknown = grid.count(CellState.UNKNOWN)
        if unknown:
            warnings.append(f"{unknown} unknown cells will be treated as obstacles")
        return warnings

    @staticmethod
    def _check_pose(pose: Pose, grid: OccupancyGrid) -> Optional[str]:
        try:
            cell = world_to_cell(grid, (pose.x, pose.y))
        except CellRangeError:
            return f"({pose.x:.3f}, {pose.y:.3f}) lies outside the map"
        if not is_traversable(grid, cell):
            return f"({pose.x:.3f}, {pose.y:.3f}) lies on a blocked cell {cell}"
        return None

    @staticmethod
    def _find_duplicates(items: List[str]) -> List[str]:
        seen = set()
        duplicates = set()
        for item in items:
            if item in seen:
                duplicates.add(item)
            seen.add(item)
        return sorted(duplicates)
