#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Voronoi Lattice Planner - Main Entry Point

Command line front end for planning, benchmarking and fixture generation,
and launcher of the Streamlit viewer.

Exit codes: 0 success, 2 planning failure, 3 input error.
"""

import argparse
import copy
import json
import logging
import math
import os
import subprocess
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.algorithms import build_gvd, generate_primitives
from src.data import (
    ScenarioLoader,
    ScenarioValidator,
    default_maze_scenarios,
    generate_maze,
    load_map,
    save_map,
    save_primitives,
)
from src.models import (
    CellRangeError,
    IsolatedCellError,
    MapFormatError,
    MapStructureError,
    MazeParameterError,
    NoPathError,
    PipelineStageError,
    PlannerError,
    PreconditionError,
    PrimitiveFileError,
    Scenario,
    ScenarioError,
    SearchMode,
    UnknownPolicy,
)
from src.ui.visualization import render_artifacts_svg, render_svg
from src.utils import PAIRED_MODES, PipelineConfig, PlanningPipeline, ResultExporter, run_benchmark

EXIT_OK = 0
EXIT_PLANNING_FAILURE = 2
EXIT_INPUT_ERROR = 3

INPUT_ERRORS = (
    MapFormatError,
    MapStructureError,
    MazeParameterError,
    PrimitiveFileError,
    ScenarioError,
    CellRangeError,
    PreconditionError,
    OSError,
    ValueError,
)

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "map": {
        "treat_unknown_as": "obstacle",
        "resolution": 0.1,
        "maze_width": 200,
        "maze_height": 200,
        "corridor_width": 14,
    },
    "robot": {
        "footprint": 0.4,
    },
    "limits": {
        "v_max": 1.5,
        "omega_max": 1.0,
        "a_max": 1.0,
    },
    "field": {
        "d_o_min": None,
        "use_voronoi_field": True,
    },
    "primitives": {
        "straight_lengths": [1, 3],
        "turn_scale": 2,
        "max_curvature": 10.0,
        "sample_spacing": 0.0,
        "allow_backward": False,
        "file": None,
    },
    "lattice": {
        "heuristic_scale": math.cos(math.pi / 8),
        "corridor_margin_cells": 0,
        "route_stretch": 0.2,
    },
    "smoother": {
        "w_s": 10.0,
        "w_r": 1.0,
        "eps_abs": 1e-6,
        "max_iter": 4000,
        "spacing": 0.1,
    },
    "trajectory": {
        "ds": 0.1,
        "bc_type": "natural",
        "v_start": 0.0,
        "v_end": 0.0,
    },
    "benchmark": {
        "mazes": 10,
        "repetitions": 1,
        "excel": True,
    },
    "ui": {
        "port": 8501,
        "host": "localhost",
    },
}

logger = logging.getLogger("voronoi_planner")


def load_config(config_path: str = "config.json") -> Dict[str, Any]:
    """Load configuration file

    Sections of the user file are merged key by key over DEFAULT_CONFIG.

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    if not config_path or not os.path.exists(config_path):
        return config

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            user_config = json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        logger.warning(f"Configuration file loading error: {e}; using default configuration")
        return config

    for section, values in user_config.items():
        if isinstance(values, dict) and isinstance(config.get(section), dict):
            config[section].update(values)
        else:
            config[section] = values
    return config


def create_default_config(config_path: str = "config.json") -> None:
    """Write DEFAULT_CONFIG to config_path"""
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(DEFAULT_CONFIG, f, ensure_ascii=False, indent=2)
    print(f"Default configuration file created: {config_path}")


def scenario_defaults(config: Dict[str, Any]) -> Dict[str, Any]:
    """Scenario keys taken from the configuration when a scenario file omits them"""
    defaults = {
        "footprint": config["robot"]["footprint"],
        "v_max": config["limits"]["v_max"],
        "omega_max": config["limits"]["omega_max"],
        "a_max": config["limits"]["a_max"],
        "use_voronoi_field": config["field"]["use_voronoi_field"],
        "w_s": config["smoother"]["w_s"],
        "w_r": config["smoother"]["w_r"],
        "v_start": config["trajectory"]["v_start"],
        "v_end": config["trajectory"]["v_end"],
    }
    if config["field"].get("d_o_min") is not None:
        defaults["d_o_min"] = config["field"]["d_o_min"]
    return defaults


def exit_code_for(error: Exception) -> int:
    """Map an exception to the CLI exit code"""
    cause = error.cause if isinstance(error, PipelineStageError) else error
    if isinstance(cause, (NoPathError, IsolatedCellError)):
        return EXIT_PLANNING_FAILURE
    if isinstance(cause, INPUT_ERRORS):
        return EXIT_INPUT_ERROR
    return EXIT_PLANNING_FAILURE if isinstance(error, PipelineStageError) else EXIT_INPUT_ERROR


def _maze_record(args: argparse.Namespace, config: Dict[str, Any]) -> Dict[str, Any]:
    seed = args.seed if args.seed is not None else 0
    return {
        "name": f"maze_{seed}",
        "maze_width": config["map"]["maze_width"],
        "maze_height": config["map"]["maze_height"],
        "corridor_width": config["map"]["corridor_width"],
        "maze_seed": seed,
        "resolution": config["map"]["resolution"],
        "seed": seed,
        "start": "room 0 0 0",
        "goal": "room -1 -1 0",
    }


def build_scenarios(args: argparse.Namespace, config: Dict[str, Any]) -> List[Scenario]:
    """Scenarios named by --scenario, --map (with --start/--goal) or a generated maze"""
    defaults = scenario_defaults(config)
    if getattr(args, "scenario", None):
        scenarios = ScenarioLoader.load_from_file(args.scenario, defaults=defaults)
    elif getattr(args, "map", None):
        if not args.start or not args.goal:
            raise ScenarioError("--map needs --start and --goal poses")
        record = dict(defaults, name=Path(args.map).stem, map=args.map, start=args.start, goal=args.goal)
        scenarios = [ScenarioLoader.from_dict(record)]
    else:
        scenarios = [ScenarioLoader.from_dict(dict(defaults, **_maze_record(args, config)))]

    overrides: Dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "local_length", None) is not None:
        overrides["local_length"] = args.local_length
    mode = getattr(args, "mode", None)
    result = []
    for sc in scenarios:
        for key, value in overrides.items():
            setattr(sc, key, value)
        result.append(sc.with_mode(SearchMode.from_string(mode)) if mode else sc)
    return result


def cmd_plan(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Plan one scenario and write SVG + CSV outputs"""
    scenarios = build_scenarios(args, config)
    pipeline = PlanningPipeline(PipelineConfig.from_dict(config))
    exporter = ResultExporter(args.out_dir)

    exit_code = EXIT_OK
    for scenario in scenarios:
        grid = pipeline.load_grid(scenario)
        errors = ScenarioValidator.validate_scenario(scenario, grid)
        if errors:
            for error in errors:
                logger.error(error)
            return EXIT_INPUT_ERROR
        for warning in ScenarioValidator.validate_map(grid):
            logger.warning(warning)

        try:
            artifacts = pipeline.run(scenario)
        except PipelineStageError as e:
            logger.error(f"Planning failed in stage '{e.stage}': {e.cause}")
            exit_code = max(exit_code, exit_code_for(e))
            continue

        stem = f"{scenario.name}_{scenario.mode.value}"
        written = exporter.export_plan(artifacts, stem)
        svg_path = Path(args.out_dir) / f"{stem}.svg"
        svg_path.write_text(render_artifacts_svg(artifacts), encoding="utf-8")
        if artifacts.corridor is not None and not artifacts.corridor.is_full_space:
            exporter.export_corridor(artifacts.corridor, f"{stem}_corridor.pbm")

        metrics = artifacts.metrics
        print(f"{scenario.name} [{scenario.mode.value}] expansions={artifacts.search.expansions} "
              f"cost={artifacts.search.cost:.3f}s S={metrics.S:.2f}m T={metrics.T:.2f}s "
              f"K_max={metrics.K_max:.3f}")
        print(f"  wrote {svg_path} and {len(written)} data files to {args.out_dir}")
    return exit_code


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Run the paired corridor/full-space benchmark and write the report"""
    bench = config["benchmark"]
    if args.scenario or args.map or args.seed is not None:
        scenarios = build_scenarios(args, config)
    else:
        scenarios = default_maze_scenarios(
            count=int(bench["mazes"]),
            width=int(config["map"]["maze_width"]),
            height=int(config["map"]["maze_height"]),
            corridor_width=int(config["map"]["corridor_width"]),
            resolution=float(config["map"]["resolution"]),
            defaults=scenario_defaults(config),
        )
        if args.local_length is not None:
            for sc in scenarios:
                sc.local_length = args.local_length

    errors = ScenarioValidator.validate_scenarios(scenarios)
    if errors:
        for error in errors:
            logger.error(error)
        return EXIT_INPUT_ERROR

    modes = [SearchMode.from_string(args.mode)] if args.mode else list(PAIRED_MODES)
    reps = args.reps if args.reps is not None else int(bench["repetitions"])
    pipeline = PlanningPipeline(PipelineConfig.from_dict(config))
    report = run_benchmark(scenarios, repetitions=reps, pipeline=pipeline, modes=modes)

    exporter = ResultExporter(args.out_dir)
    written = exporter.export_report_csv(report)
    if bench.get("excel", True) and not report.is_empty():
        written["excel"] = exporter.export_to_excel(report)

    print(f"Runs: {report.run_count}, failures: {len(report.failures)}")
    if report.paired_reductions():
        print(f"Mean expansion reduction: {report.mean_expansion_reduction():.1f}%")
        print(f"Mean graph size reduction: {report.mean_graph_size_reduction():.1f}%")
    for name, path in written.items():
        print(f"  {name}: {path}")
    return EXIT_OK


def cmd_gen_maze(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    seed = args.seed if args.seed is not None else 0
    grid = generate_maze(
        args.width or int(config["map"]["maze_width"]),
        args.height or int(config["map"]["maze_height"]),
        args.corridor_width or int(config["map"]["corridor_width"]),
        seed,
        resolution=float(config["map"]["resolution"]),
    )
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    path = save_map(grid, Path(args.out_dir) / f"maze_{seed}.pgm")
    print(f"Maze written to {path}")
    return EXIT_OK


def cmd_gen_prims(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    pipeline_config = PipelineConfig.from_dict(config)
    resolution = args.resolution or float(config["map"]["resolution"])
    footprint = args.footprint or float(config["robot"]["footprint"])
    prims = generate_primitives(resolution, footprint, pipeline_config.primitive_config)

    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    path = Path(args.out_dir) / f"primitives_{resolution:g}_{footprint:g}.txt"
    save_primitives(prims, path)
    print(f"{len(prims.primitives)} primitives written to {path}")
    return EXIT_OK


def cmd_dump_gvd(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    if args.map:
        grid = load_map(args.map)
        stem = Path(args.map).stem
    else:
        seed = args.seed if args.seed is not None else 0
        grid = generate_maze(int(config["map"]["maze_width"]), int(config["map"]["maze_height"]),
                             int(config["map"]["corridor_width"]), seed,
                             resolution=float(config["map"]["resolution"]))
        stem = f"maze_{seed}"

    gvd = build_gvd(grid, UnknownPolicy.from_string(config["map"]["treat_unknown_as"]))
    exporter = ResultExporter(args.out_dir)
    csv_path = exporter.export_gvd(gvd, f"{stem}_gvd.csv")
    svg_path = Path(args.out_dir) / f"{stem}_gvd.svg"
    svg_path.write_text(render_svg(grid, gvd=gvd), encoding="utf-8")
    print(f"GVD: {int(gvd.is_voronoi.sum())} Voronoi cells, written to {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_ui(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Launch Streamlit application"""
    app_path = Path(__file__).parent / "src" / "ui" / "app.py"
    cmd = [
        "streamlit", "run", str(app_path),
        "--server.port", str(config["ui"]["port"]),
        "--server.address", config["ui"]["host"],
    ]
    if args.debug:
        cmd.extend(["--logger.level", "debug"])

    env = os.environ.copy()
    env["VORONOI_PLANNER_CONFIG"] = json.dumps(config)
    print(f"URL: http://{config['ui']['host']}:{config['ui']['port']}")
    try:
        subprocess.run(cmd, env=env)
    except KeyboardInterrupt:
        print("\nShutting down application.")
    except FileNotFoundError:
        print("Error: Streamlit is not installed.")
        return EXIT_INPUT_ERROR
    return EXIT_OK


COMMANDS = {
    "plan": cmd_plan,
    "bench": cmd_bench,
    "gen-maze": cmd_gen_maze,
    "gen-prims": cmd_gen_prims,
    "dump-gvd": cmd_dump_gvd,
    "ui": cmd_ui,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", default="config.json",
                        help="Configuration file path (default: config.json)")
    common.add_argument("--debug", action="store_true", help="Verbose logging")
    common.add_argument("--out-dir", default="exports", help="Output directory (default: exports)")
    common.add_argument("--seed", type=int, help="Maze seed / scenario seed")

    scenario = argparse.ArgumentParser(add_help=False)
    scenario.add_argument("--map", help="Map image (.pgm) or its .meta sidecar")
    scenario.add_argument("--scenario", help="Scenario file (key: value or JSON)")
    scenario.add_argument("--start", help="Start pose 'x y [theta]' for --map")
    scenario.add_argument("--goal", help="Goal pose 'x y [theta]' for --map")
    scenario.add_argument("--mode", choices=["corridor", "full"], help="Search mode")
    scenario.add_argument("--local-length", type=float, help="Truncate the searched path before smoothing [m]")

    parser = argparse.ArgumentParser(description="Voronoi corridor lattice planner")
    parser.add_argument("--create-config", nargs="?", const="config.json", metavar="PATH",
                        help="Create default configuration file (default: config.json) and exit")
    sub = parser.add_subparsers(dest="command")

    sub.add_parser("plan", parents=[common, scenario], help="Plan one scenario (SVG + CSV)")
    bench = sub.add_parser("bench", parents=[common, scenario], help="Corridor vs full-space benchmark")
    bench.add_argument("--reps", type=int, help="Repetitions per scenario")

    maze = sub.add_parser("gen-maze", parents=[common], help="Generate a maze map")
    maze.add_argument("--width", type=int)
    maze.add_argument("--height", type=int)
    maze.add_argument("--corridor-width", type=int)

    prims = sub.add_parser("gen-prims", parents=[common], help="Generate a motion primitive file")
    prims.add_argument("--resolution", type=float)
    prims.add_argument("--footprint", type=float, help="Footprint half-width [m]")

    gvd = sub.add_parser("dump-gvd", parents=[common], help="Write the GVD of a map")
    gvd.add_argument("--map", help="Map image (.pgm) or its .meta sidecar")

    sub.add_parser("ui", parents=[common], help="Launch the Streamlit viewer")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "debug", False) else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.create_config:
        create_default_config(args.create_config)
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_OK

    config = load_config(args.config)

    try:
        return COMMANDS[args.command](args, config)
    except PipelineStageError as e:
        logger.error(f"Stage '{e.stage}' failed: {e.cause}")
        return exit_code_for(e)
    except PlannerError as e:
        logger.error(str(e))
        return exit_code_for(e)
    except (OSError, ValueError) as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
