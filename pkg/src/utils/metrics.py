#!/usr/bin/env python3
# -*- coding: utf-8 -*-
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from ..models import BenchmarkReport, SearchMode

# columns that depend on the wall clock
TIMING_SUFFIX = "_ms"


@dataclass
class ModeSummary:
    """Aggregate search and trajectory figures for one search mode"""
    mode: str
    runs: int
    mean_expansions: float
    mean_graph_size: float
    mean_path_cost: float
    mean_planning_time_ms: float
    mean_length: float
    mean_time: float
    mean_min_clearance: float


@dataclass
class ComparisonSummary:
    """Corridor vs full-space figures over paired runs"""
    pairs: int
    equal_cost_pairs: int
    mean_expansion_reduction_pct: float
    mean_graph_size_reduction_pct: float
    all_expansions_reduced: bool
    all_graph_sizes_reduced: bool


class MetricsCalculator:
    """Calculate summary tables for a benchmark report"""

    def __init__(self, report: BenchmarkReport):
        self.report = report

    def search_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.report.search_rows)

    def smoothing_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.report.smoothing_rows)

    def trajectory_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.report.trajectory_rows)

    def failures_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.report.failures)

    def pairs_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.report.paired_reductions())

    def mode_summaries(self) -> List[ModeSummary]:
        """One summary per search mode present in the report"""
        search = self.search_frame()
        trajectory = self.trajectory_frame()
        if search.empty:
            return []

        summaries = []
        for mode in sorted(search["mode"].unique()):
            rows = search[search["mode"] == mode]
            traj = trajectory[trajectory["mode"] == mode] if not trajectory.empty else trajectory
            summaries.append(ModeSummary(
                mode=mode,
                runs=len(rows),
                mean_expansions=float(rows["expansions"].mean()),
                mean_graph_size=float(rows["graph_size"].mean()),
                mean_path_cost=float(rows["path_cost"].mean()),
                mean_planning_time_ms=round(float(rows["planning_time_ms"].mean()), 3),
                mean_length=float(traj["S"].mean()) if not traj.empty else float("nan"),
                mean_time=float(traj["T"].mean()) if not traj.empty else float("nan"),
                mean_min_clearance=float(traj["min_clearance"].mean()) if not traj.empty else float("nan"),
            ))
        return summaries

    def comparison(self) -> Optional[ComparisonSummary]:
        """Paired corridor/full-space comparison, None without pairs"""
        pairs = self.report.paired_reductions()
        if not pairs:
            return None
        return ComparisonSummary(
            pairs=len(pairs),
            equal_cost_pairs=sum(1 for p in pairs if p["equal_cost"]),
            mean_expansion_reduction_pct=round(self.report.mean_expansion_reduction(), 3),
            mean_graph_size_reduction_pct=round(self.report.mean_graph_size_reduction(), 3),
            all_expansions_reduced=all(p["expansion_reduction_pct"] > 0 for p in pairs),
            all_graph_sizes_reduced=all(p["graph_size_reduction_pct"] > 0 for p in pairs),
        )

    def summary_rows(self) -> List[Dict[str, Any]]:
        """Metric/Value rows for the summary sheet"""
        rows: List[Dict[str, Any]] = [
            {"Metric": "Runs", "Value": self.report.run_count},
            {"Metric": "Failures", "Value": len(self.report.failures)},
        ]
        for mode, stats in sorted(self.report.planning_time_stats().items()):
            for key, value in stats.items():
                rows.append({"Metric": f"Planning time {key} ({mode}) [ms]", "Value": value})
        for key, value in self.report.smoothing_stats().items():
            rows.append({"Metric": f"Smoothing time {key} [ms]", "Value": value})
        by_mode = {}
        for summary in self.mode_summaries():
            by_mode[summary.mode] = summary
            rows.append({"Metric": f"Mean expansions ({summary.mode})", "Value": summary.mean_expansions})
            rows.append({"Metric": f"Mean graph size ({summary.mode})", "Value": summary.mean_graph_size})
            rows.append({"Metric": f"Mean S ({summary.mode}) [m]", "Value": summary.mean_length})
            rows.append({"Metric": f"Mean T ({summary.mode}) [s]", "Value": summary.mean_time})
            rows.append({"Metric": f"Mean min clearance ({summary.mode}) [m]", "Value": summary.mean_min_clearance})

        corridor = by_mode.get(SearchMode.CORRIDOR.value)
        full = by_mode.get(SearchMode.FULL_SPACE.value)
        if corridor is not None and full is not None:
            rows.append({
                "Metric": "Clearance gain corridor vs full [%]",
                "Value": safety_improvement(full.mean_min_clearance, corridor.mean_min_clearance),
            })

        comparison = self.comparison()
        if comparison is not None:
            rows.append({"Metric": "Paired runs", "Value": comparison.pairs})
            rows.append({"Metric": "Equal-cost pairs", "Value": comparison.equal_cost_pairs})
            rows.append({"Metric": "Expansion reduction [%]", "Value": comparison.mean_expansion_reduction_pct})
            rows.append({"Metric": "Graph size reduction [%]", "Value": comparison.mean_graph_size_reduction_pct})
        return rows


def drop_timing_columns(frame: pd.DataFrame) -> pd.DataFrame:
    """Columns that are reproducible across runs with the same seeds"""
    return frame[[c for c in frame.columns if not str(c).endswith(TIMING_SUFFIX)]]


def safety_improvement(baseline_clearance: float, clearance: float) -> float:
    """Relative clearance gain in percent"""
    if baseline_clearance <= 0 or not np.isfinite(baseline_clearance):
        return float("nan")
    return 100.0 * (clearance - baseline_clearance) / baseline_clearance


def mode_label(mode: str) -> str:
    return "Voronoi corridor" if mode == SearchMode.CORRIDOR.value else "Full space"
