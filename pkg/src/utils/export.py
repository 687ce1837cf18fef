#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import json
import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd
from PIL import Image

from ..algorithms.field import field_to_frame
from ..algorithms.gvd import gvd_to_frame
from ..models import BenchmarkReport, GvdMap, Pose, VelocityProfile, VoronoiCorridor, VoronoiField
from .metrics import MetricsCalculator
from .pipeline import PlanArtifacts

logger = logging.getLogger(__name__)


class ResultExporter:
    """Export planning results and benchmark reports to various formats"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def export_report_csv(self, report: BenchmarkReport, prefix: str = "bench") -> Dict[str, str]:
        """Write the search, smoothing and trajectory tables (plus failures and pairs when present)"""
        calc = MetricsCalculator(report)
        frames = {
            "search": calc.search_frame(),
            "smoothing": calc.smoothing_frame(),
            "trajectory": calc.trajectory_frame(),
        }
        if report.failures:
            frames["failures"] = calc.failures_frame()
        pairs = calc.pairs_frame()
        if not pairs.empty:
            frames["pairs"] = pairs

        written = {}
        for name, frame in frames.items():
            path = self.out_dir / f"{prefix}_{name}.csv"
            frame.to_csv(path, index=False, encoding="utf-8")
            written[name] = str(path)
        logger.info(f"Benchmark tables written to {self.out_dir}")
        return written

    def export_to_excel(self, report: BenchmarkReport, file_name: str = "benchmark.xlsx") -> str:
        """Export the report as a workbook with Search, Smoothing, Trajectory and Summary sheets"""
        output_path = self.out_dir / file_name
        calc = MetricsCalculator(report)

        with pd.ExcelWriter(output_path, engine="openpyxl") as writer:
            calc.search_frame().to_excel(writer, sheet_name="Search", index=False)
            calc.smoothing_frame().to_excel(writer, sheet_name="Smoothing", index=False)
            calc.trajectory_frame().to_excel(writer, sheet_name="Trajectory", index=False)
            pd.DataFrame(calc.summary_rows()).to_excel(writer, sheet_name="Summary", index=False)
            if report.failures:
                calc.failures_frame().to_excel(writer, sheet_name="Failures", index=False)

        return str(output_path)

    def export_plan(self, artifacts: PlanArtifacts, stem: str = "plan") -> Dict[str, str]:
        """Poses, smoothed path, velocity profile and metrics of one run"""
        written = {
            "search_path": self.export_poses(artifacts.search.path, f"{stem}_search.txt"),
            "smoothed_path": self.export_points(artifacts.smoothed.vertices, f"{stem}_smoothed.txt"),
            "profile": self.export_profile(artifacts.profile, f"{stem}_profile.csv"),
        }

        row = {"scenario": artifacts.scenario.name, "mode": artifacts.scenario.mode.value}
        row.update(artifacts.search.to_row())
        row.update({
            "smoothing_time_ms": round(artifacts.smoothed.solve_time * 1000.0, 3),
            "smoothing_iterations": artifacts.smoothed.iterations,
            "smoothing_status": artifacts.smoothed.status.value,
        })
        row.update(artifacts.metrics.to_row())
        metrics_path = self.out_dir / f"{stem}_metrics.csv"
        pd.DataFrame([row]).to_csv(metrics_path, index=False, encoding="utf-8")
        written["metrics"] = str(metrics_path)

        scenario_path = self.out_dir / f"{stem}_scenario.json"
        with open(scenario_path, "w", encoding="utf-8") as f:
            json.dump(artifacts.scenario.to_dict(), f, indent=2, ensure_ascii=False)
        written["scenario"] = str(scenario_path)
        return written

    def export_poses(self, poses: List[Pose], file_name: str) -> str:
        """One `x y theta` line per pose"""
        path = self.out_dir / file_name
        with open(path, "w", encoding="utf-8") as f:
            for p in poses:
                f.write(f"{p.x!r} {p.y!r} {p.theta!r}\n")
        return str(path)

    def export_points(self, points: np.ndarray, file_name: str) -> str:
        """One `x y` line per vertex"""
        path = self.out_dir / file_name
        with open(path, "w", encoding="utf-8") as f:
            for x, y in np.asarray(points, dtype=float):
                f.write(f"{float(x)!r} {float(y)!r}\n")
        return str(path)

    def export_profile(self, profile: VelocityProfile, file_name: str) -> str:
        """Columns s, v, t_cumulative"""
        path = self.out_dir / file_name
        pd.DataFrame({
            "s": profile.s,
            "v": profile.v,
            "t_cumulative": profile.cumulative_time(),
        }).to_csv(path, index=False, encoding="utf-8")
        return str(path)

    def export_gvd(self, gvd: GvdMap, file_name: str = "gvd.csv") -> str:
        path = self.out_dir / file_name
        gvd_to_frame(gvd).to_csv(path, index=False, encoding="utf-8")
        return str(path)

    def export_field(self, field: VoronoiField, file_name: str = "field.csv") -> str:
        path = self.out_dir / file_name
        field_to_frame(field).to_csv(path, index=False, encoding="utf-8")
        return str(path)

    def export_corridor(self, corridor: VoronoiCorridor, file_name: str = "corridor.pbm") -> str:
        """Corridor mask as a bitmap: corridor cells white, top image row is the top of the map"""
        path = self.out_dir / file_name
        bitmap = np.flipud(corridor.mask).astype(np.uint8) * 255
        Image.fromarray(np.ascontiguousarray(bitmap)).convert("1").save(path, format="PPM")
        return str(path)
