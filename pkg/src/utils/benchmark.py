#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
from typing import Any, Dict, Optional, Sequence

from ..models import BenchmarkReport, PipelineStageError, Scenario, SearchMode
from .pipeline import PlanArtifacts, PlanningPipeline

logger = logging.getLogger(__name__)

PAIRED_MODES = (SearchMode.CORRIDOR, SearchMode.FULL_SPACE)


def run_benchmark(scenarios: Sequence[Scenario], repetitions: int = 1,
                  pipeline: Optional[PlanningPipeline] = None,
                  modes: Optional[Sequence[SearchMode]] = PAIRED_MODES) -> BenchmarkReport:
    """
    シナリオ群を repetitions 回ずつ実行し、探索・平滑化・軌道の各表を集計する

    modes を与えると各シナリオをそのモードで実行し（既定は回廊と全空間の対）、
    None なら各シナリオ自身のモードを使う。失敗は行ごとに記録して続行する。
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    pipeline = pipeline or PlanningPipeline()
    report = BenchmarkReport()

    for scenario in scenarios:
        run_modes = list(modes) if modes else [scenario.mode]
        for rep in range(repetitions):
            for mode in run_modes:
                run = scenario.with_mode(mode)
                try:
                    artifacts = pipeline.run(run)
                except PipelineStageError as e:
                    logger.warning(f"Benchmark run {run.name}#{rep} ({mode.value}) failed in '{e.stage}': {e.cause}")
                    report.failures.append(_failure_row(run, rep, e))
                    continue
                append_run(report, artifacts, rep)
                logger.info(
                    f"{run.name}#{rep} {mode.value}: expansions={artifacts.search.expansions}, "
                    f"planning={artifacts.search.planning_time_ms:.3f} ms, "
                    f"smoothing={artifacts.smoothed.solve_time * 1000:.3f} ms"
                )

    if report.is_empty():
        logger.info("Benchmark finished with no runs")
    else:
        logger.info(
            f"Benchmark finished: {report.run_count} runs, {len(report.failures)} failures, "
            f"mean expansion reduction {report.mean_expansion_reduction():.1f}%"
        )
    return report


def _identity(scenario: Scenario, rep: int) -> Dict[str, Any]:
    return {
        "scenario": scenario.name,
        "repetition": rep,
        "mode": scenario.mode.value,
        "seed": scenario.seed,
    }


def append_run(report: BenchmarkReport, artifacts: PlanArtifacts, rep: int) -> None:
    """Add the search, smoothing and trajectory rows of one successful run"""
    scenario = artifacts.scenario
    search = artifacts.search

    row = _identity(scenario, rep)
    row.update(search.to_row())
    row["path_length"] = round(search.path_length, 6)
    row["corridor_cells"] = artifacts.corridor.area_cells if artifacts.corridor is not None else 0
    for stage, value in search.timings.items():
        row[f"{stage}_ms"] = value
    report.search_rows.append(row)

    smoothed = artifacts.smoothed
    row = _identity(scenario, rep)
    row.update({
        "vertices": smoothed.n,
        "iterations": smoothed.iterations,
        "status": smoothed.status.value,
        "objective": smoothed.objective,
        "reference_objective": smoothed.reference_objective,
        "smoothing_time_ms": round(smoothed.solve_time * 1000.0, 3),
    })
    report.smoothing_rows.append(row)

    row = _identity(scenario, rep)
    row.update(artifacts.metrics.to_row())
    report.trajectory_rows.append(row)


def _failure_row(scenario: Scenario, rep: int, error: PipelineStageError) -> Dict[str, Any]:
    row = _identity(scenario, rep)
    row.update({
        "stage": error.stage,
        "error_type": type(error.cause).__name__,
        "error": str(error.cause),
    })
    return row
