#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..models import MazeSpec, Pose, Scenario, ScenarioError, SearchMode, SpeedLimits
from .maze_generator import maze_layout

logger = logging.getLogger(__name__)

SCENARIO_SEPARATOR = "---"

FLOAT_KEYS = {"resolution", "v_max", "omega_max", "a_max", "footprint", "d_o_min", "w_s", "w_r",
              "local_length", "v_start", "v_end"}
INT_KEYS = {"maze_width", "maze_height", "corridor_width", "maze_seed", "wall_thickness", "seed"}
BOOL_KEYS = {"use_voronoi_field"}
TEXT_KEYS = {"name", "map", "start", "goal", "mode"}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | BOOL_KEYS | TEXT_KEYS

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ScenarioLoader:
    """シナリオファイル（key: value 形式または JSON）を読み込むクラス"""

    @staticmethod
    def load_from_file(file_path: Union[str, Path],
                       defaults: Optional[Dict[str, Any]] = None) -> List[Scenario]:
        """
        ファイルからシナリオのリストを読み込む

        key: value 形式では `---` の行で複数のシナリオを区切る。
        defaults はファイルにないキーの既定値（設定ファイル由来）。
        地図のパスはシナリオファイルからの相対パスとして解決する。
        """
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        with open(file_path, "r", encoding="utf-8") as f:
            text = f.read()

        if file_path.suffix.lower() == ".json":
            records = ScenarioLoader._json_records(text)
        else:
            records = ScenarioLoader.parse_text(text)

        scenarios = []
        for index, record in enumerate(records):
            merged = dict(defaults or {})
            merged.update(record)
            merged.setdefault("name", f"{file_path.stem}_{index + 1}")
            scenarios.append(ScenarioLoader.from_dict(merged, base_dir=file_path.parent))
        logger.info(f"Loaded {len(scenarios)} scenario(s) from {file_path}")
        return scenarios

    @staticmethod
    def parse_text(text: str) -> List[Dict[str, Any]]:
        records: List[Dict[str, Any]] = []
        current: Dict[str, Any] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line == SCENARIO_SEPARATOR:
                if current:
                    records.append(current)
                current = {}
                continue
            if not line:
                continue
            key, sep, value = line.partition(":")
            key = key.strip()
            if not sep:
                raise ScenarioError(f"line {line_no}: expected 'key: value', got {raw.strip()!r}")
            if key not in KNOWN_KEYS:
                raise ScenarioError(f"line {line_no}: unknown scenario key '{key}'")
            if key in current:
                raise ScenarioError(f"line {line_no}: duplicate key '{key}'")
            try:
                current[key] = _convert(key, value.strip())
            except ValueError as e:
                raise ScenarioError(f"line {line_no}: {e}")
        if current:
            records.append(current)
        return records

    @staticmethod
    def from_dict(data: Dict[str, Any], base_dir: Optional[Path] = None) -> Scenario:
        """辞書（ファイルの1レコードや設定値）から Scenario を構築"""
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ScenarioError(f"Unknown scenario keys: {sorted(unknown)}")
        data = {k: _convert(k, v) if isinstance(v, str) else v for k, v in data.items()}

        name = str(data.get("name", "scenario"))
        map_path = data.get("map")
        maze = None
        if map_path:
            path = Path(map_path)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            map_path = str(path)
        elif "maze_width" in data or "maze_seed" in data:
            maze = MazeSpec(
                width=int(data.get("maze_width", 200)),
                height=int(data.get("maze_height", data.get("maze_width", 200))),
                corridor_width=int(data.get("corridor_width", 14)),
                seed=int(data.get("maze_seed", data.get("seed", 0))),
                resolution=float(data.get("resolution", 0.1)),
                wall_thickness=int(data.get("wall_thickness", 4)),
            )
        else:
            raise ScenarioError(f"Scenario '{name}' names neither a map file nor a maze")

        for key in ("start", "goal"):
            if key not in data:
                raise ScenarioError(f"Scenario '{name}' is missing '{key}'")
        start = _pose(data["start"], maze, name)
        goal = _pose(data["goal"], maze, name)

        try:
            limits = SpeedLimits(
                v_max=float(data.get("v_max", 1.5)),
                omega_max=float(data.get("omega_max", 1.0)),
                a_max=float(data.get("a_max", 1.0)),
            )
            mode = SearchMode.from_string(data.get("mode", "corridor"))
        except ValueError as e:
            raise ScenarioError(f"Scenario '{name}': {e}")

        return Scenario(
            name=name,
            start=start,
            goal=goal,
            map_path=map_path,
            maze=maze,
            limits=limits,
            footprint=float(data.get("footprint", 0.4)),
            d_o_min=data.get("d_o_min"),
            w_s=float(data.get("w_s", 10.0)),
            w_r=float(data.get("w_r", 1.0)),
            seed=int(data.get("seed", 0)),
            mode=mode,
            use_voronoi_field=bool(data.get("use_voronoi_field", True)),
            local_length=data.get("local_length"),
            v_start=float(data.get("v_start", 0.0)),
            v_end=float(data.get("v_end", 0.0)),
        )

    @staticmethod
    def save_to_text(scenarios: List[Scenario], file_path: Union[str, Path]) -> None:
        blocks = []
        for sc in scenarios:
            lines = [f"name: {sc.name}"]
            if sc.map_path:
                lines.append(f"map: {sc.map_path}")
            elif sc.maze:
                lines += [
                    f"maze_width: {sc.maze.width}",
                    f"maze_height: {sc.maze.height}",
                    f"corridor_width: {sc.maze.corridor_width}",
                    f"maze_seed: {sc.maze.seed}",
                    f"wall_thickness: {sc.maze.wall_thickness}",
                    f"resolution: {sc.maze.resolution!r}",
                ]
            lines += [
                f"start: {sc.start.x!r} {sc.start.y!r} {sc.start.theta!r}",
                f"goal: {sc.goal.x!r} {sc.goal.y!r} {sc.goal.theta!r}",
                f"v_max: {sc.limits.v_max!r}",
                f"omega_max: {sc.limits.omega_max!r}",
                f"a_max: {sc.limits.a_max!r}",
                f"footprint: {sc.footprint!r}",
                f"w_s: {sc.w_s!r}",
                f"w_r: {sc.w_r!r}",
                f"seed: {sc.seed}",
                f"mode: {sc.mode.value}",
                f"use_voronoi_field: {str(sc.use_voronoi_field).lower()}",
            ]
            if sc.d_o_min is not None:
                lines.append(f"d_o_min: {sc.d_o_min!r}")
            if sc.local_length is not None:
                lines.append(f"local_length: {sc.local_length!r}")
            blocks.append("\n".join(lines))
        with open(file_path, "w", encoding="utf-8") as f:
            f.write(f"\n{SCENARIO_SEPARATOR}\n".join(blocks) + "\n")

    @staticmethod
    def _json_records(text: str) -> List[Dict[str, Any]]:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"line {e.lineno}: invalid JSON ({e.msg})")
        if isinstance(data, dict) and "scenarios" in data:
            data = data["scenarios"]
        if isinstance(data, dict):
            data = [data]
        if not isinstance(data, list) or not all(isinstance(item, dict) for item in data):
            raise ScenarioError("JSON scenario file must hold an object or a list of objects")
        return data


def default_maze_scenarios(count: int = 10, width: int = 200, height: int = 200, corridor_width: int = 14,
                           resolution: float = 0.1, defaults: Optional[Dict[str, Any]] = None) -> List[Scenario]:
    """
    seed 0..count-1 の迷路で左下の部屋から右上の部屋へ向かうシナリオ群

    ベンチマークの既定の入力。
    """
    scenarios = []
    for seed in range(count):
        record = dict(defaults or {})
        record.update({
            "name": f"maze_{seed}",
            "maze_width": width,
            "maze_height": height,
            "corridor_width": corridor_width,
            "maze_seed": seed,
            "resolution": resolution,
            "seed": seed,
            "start": "room 0 0 0",
            "goal": "room -1 -1 0",
        })
        scenarios.append(ScenarioLoader.from_dict(record))
    return scenarios


def _convert(key: str, value: Any) -> Any:
    if not isinstance(value, str):
        return value
    if key in FLOAT_KEYS:
        if value.lower() in ("", "none", "null"):
            return None
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"'{key}' must be a number, got {value!r}")
    if key in INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ValueError(f"'{key}' must be an integer, got {value!r}")
    if key in BOOL_KEYS:
        if value.lower() in _TRUE:
            return True
        if value.lower() in _FALSE:
            return False
        raise ValueError(f"'{key}' must be true or false, got {value!r}")
    return value


def _pose(value: Any, maze: Optional[MazeSpec], name: str) -> Pose:
    """`x y [theta]`、`[x, y, theta]`、または迷路の `room i j [theta]`"""
    if isinstance(value, (list, tuple)):
        parts = [str(v) for v in value]
    else:
        parts = str(value).split()

    if parts and parts[0] == "room":
        if maze is None:
            raise ScenarioError(f"Scenario '{name}': 'room' poses need a generated maze")
        if len(parts) not in (3, 4):
            raise ScenarioError(f"Scenario '{name}': expected 'room i j [theta]', got {value!r}")
        try:
            layout = maze_layout(maze.width, maze.height, maze.corridor_width, maze.wall_thickness,
                                 maze.resolution)
            i, j = int(parts[1]) % layout.rooms_x, int(parts[2]) % layout.rooms_y
            x, y = layout.room_center(i, j)
            theta = float(parts[3]) if len(parts) == 4 else 0.0
        except ValueError as e:
            raise ScenarioError(f"Scenario '{name}': {e}")
        return Pose(x, y, theta)

    if len(parts) not in (2, 3):
        raise ScenarioError(f"Scenario '{name}': expected 'x y [theta]', got {value!r}")
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ScenarioError(f"Scenario '{name}': pose values must be numbers, got {value!r}")
    return Pose(*numbers)
