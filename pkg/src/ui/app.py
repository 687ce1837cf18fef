#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd
import streamlit as st

# Add project root to Python path
project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.data.map_loader import MapLoader
from src.data.scenario_loader import ScenarioLoader
from src.data.validators import ScenarioValidator
from src.models import BenchmarkReport, PipelineStageError, PlannerError, SearchMode
from src.ui.visualization import (
    comparison_chart,
    field_heatmap,
    map_figure,
    pose_table,
    render_artifacts_svg,
    velocity_figure,
)
from src.utils.benchmark import append_run
from src.utils.metrics import MetricsCalculator, mode_label
from src.utils.pipeline import PipelineConfig, PlanArtifacts, PlanningPipeline

CONFIG_ENV = "VORONOI_PLANNER_CONFIG"


def _app_config() -> Dict[str, Any]:
    raw = os.environ.get(CONFIG_ENV)
    if not raw:
        return {}
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return {}


class PlannerApp:
    """Interactive viewer for the corridor-restricted lattice planner"""

    def __init__(self):
        self.config = _app_config()
        self.initialize_session_state()
        self.pipeline = st.session_state.pipeline

    def initialize_session_state(self):
        """Initialize session state"""
        if "pipeline" not in st.session_state:
            st.session_state.pipeline = PlanningPipeline(PipelineConfig.from_dict(self.config))
        if "results" not in st.session_state:
            st.session_state.results = {}
        if "errors" not in st.session_state:
            st.session_state.errors = {}
        if "uploaded_map" not in st.session_state:
            st.session_state.uploaded_map = None

    def run(self):
        """Run main application"""
        self.setup_page_layout()
        record = self.render_sidebar()
        if record is not None:
            self.execute(record)
        self.render_main_view()

    def setup_page_layout(self):
        st.set_page_config(
            page_title="Voronoi Lattice Planner",
            layout="wide",
            initial_sidebar_state="expanded",
        )
        st.title("Voronoi Corridor Lattice Planner")
        st.markdown(
            "Plan in a generated maze or an uploaded occupancy map, with the search "
            "restricted to the Voronoi corridor or over the full free space."
        )

    def render_sidebar(self) -> Optional[Dict[str, Any]]:
        """Scenario inputs; returns a scenario record when Run is pressed"""
        robot = self.config.get("robot", {})
        limits = self.config.get("limits", {})
        smoother = self.config.get("smoother", {})

        with st.sidebar:
            st.header("Map")
            source = st.radio("Source", options=["Generated maze", "Uploaded map"], horizontal=True)
            record: Dict[str, Any] = {}
            if source == "Generated maze":
                size = st.number_input("Size [cells]", min_value=20, max_value=400, value=120, step=10)
                record.update({
                    "maze_width": int(size),
                    "maze_height": int(size),
                    "corridor_width": int(st.number_input("Corridor width [cells]", min_value=3, value=14)),
                    "maze_seed": int(st.number_input("Maze seed", min_value=0, value=0)),
                    "resolution": 0.1,
                    "start": "room 0 0 0",
                    "goal": "room -1 -1 0",
                })
            else:
                record.update(self.render_map_upload())

            st.divider()
            st.header("Robot")
            record["footprint"] = st.number_input("Footprint half-width [m]", min_value=0.05,
                                                  value=float(robot.get("footprint", 0.4)), step=0.05)
            record["v_max"] = st.number_input("v_max [m/s]", min_value=0.1,
                                              value=float(limits.get("v_max", 1.5)))
            record["omega_max"] = st.number_input("omega_max [rad/s]", min_value=0.1,
                                                  value=float(limits.get("omega_max", 1.0)))
            record["a_max"] = st.number_input("a_max [m/s^2]", min_value=0.1,
                                              value=float(limits.get("a_max", 1.0)))

            with st.expander("Advanced Parameters", expanded=False):
                record["w_s"] = st.number_input("Smoothness weight w_s", min_value=0.0,
                                                value=float(smoother.get("w_s", 10.0)))
                record["w_r"] = st.number_input("Reference weight w_r", min_value=0.0,
                                                value=float(smoother.get("w_r", 1.0)))
                record["use_voronoi_field"] = st.checkbox("Use Voronoi field", value=True)
                local = st.number_input("Local path length [m] (0 = full path)", min_value=0.0, value=0.0)
                if local > 0:
                    record["local_length"] = float(local)

            st.divider()
            if st.button("Run both modes", disabled="start" not in record):
                return record
        return None

    def render_map_upload(self) -> Dict[str, Any]:
        image_file = st.file_uploader("Map image (PGM)", type=["pgm"], key="map_image")
        sidecar_file = st.file_uploader("Map metadata", type=["meta", "yaml", "txt"], key="map_meta")
        if image_file and sidecar_file and st.button("Load map"):
            try:
                grid = MapLoader.load_from_uploaded_file(image_file, sidecar_file)
            except (PlannerError, ValueError) as e:
                st.error(f"Map loading error: {e}")
            else:
                path = Path(tempfile.mkdtemp(prefix="planner_map_")) / "uploaded.pgm"
                MapLoader.save_map(grid, path)
                st.session_state.uploaded_map = str(path)
                for warning in ScenarioValidator.validate_map(grid):
                    st.warning(warning)

        if st.session_state.uploaded_map is None:
            st.info("Upload a PGM image and its metadata file")
            return {}
        st.success("Map loaded")
        start = st.text_input("Start pose (x y theta)", value="1.0 1.0 0")
        goal = st.text_input("Goal pose (x y theta)", value="5.0 5.0 0")
        return {"map": st.session_state.uploaded_map, "start": start, "goal": goal}

    def execute(self, record: Dict[str, Any]):
        """Run the scenario in corridor and full-space mode"""
        record = dict(record, name="interactive")
        try:
            scenario = ScenarioLoader.from_dict(record)
        except (PlannerError, ValueError) as e:
            st.error(f"Scenario error: {e}")
            return

        st.session_state.results = {}
        st.session_state.errors = {}
        with st.spinner("Planning..."):
            for mode in (SearchMode.CORRIDOR, SearchMode.FULL_SPACE):
                try:
                    st.session_state.results[mode.value] = self.pipeline.run(scenario.with_mode(mode))
                except PipelineStageError as e:
                    st.session_state.errors[mode.value] = f"{e.stage}: {e.cause}"

    def render_main_view(self):
        results: Dict[str, PlanArtifacts] = st.session_state.results
        for mode, message in st.session_state.errors.items():
            st.error(f"{mode_label(mode)} failed in stage {message}")
        if not results:
            st.info("Configure a scenario in the sidebar and press **Run both modes**")
            return

        tabs = st.tabs([mode_label(mode) for mode in results])
        for tab, (mode, artifacts) in zip(tabs, results.items()):
            with tab:
                self.render_result(artifacts)

        if len(results) > 1:
            st.divider()
            self.render_comparison_section(results)

    def render_result(self, artifacts: PlanArtifacts):
        search = artifacts.search
        metrics = artifacts.metrics

        col1, col2, col3, col4 = st.columns(4)
        with col1:
            st.metric("Expansions", search.expansions)
            st.metric("Graph size", search.graph_size)
        with col2:
            st.metric("Planning time", f"{search.planning_time_ms:.1f} ms")
            st.metric("Smoothing time", f"{artifacts.smoothed.solve_time * 1000:.2f} ms")
        with col3:
            st.metric("Path length S", f"{metrics.S:.2f} m")
            st.metric("Traversal time T", f"{metrics.T:.2f} s")
        with col4:
            st.metric("K_max", f"{metrics.K_max:.3f}")
            st.metric("Min clearance", f"{metrics.min_clearance:.2f} m")

        show_visited = st.checkbox("Show visited cells", value=False,
                                   key=f"visited_{artifacts.scenario.mode.value}")
        st.plotly_chart(map_figure(artifacts, show_visited=show_visited), use_container_width=True)

        col1, col2 = st.columns(2)
        with col1:
            if artifacts.voronoi_field is not None:
                st.plotly_chart(field_heatmap(artifacts.voronoi_field, artifacts.grid), use_container_width=True)
        with col2:
            st.plotly_chart(velocity_figure(artifacts.profile), use_container_width=True)

        with st.expander("Stage timings and poses", expanded=False):
            st.dataframe(pd.DataFrame([search.timings]), use_container_width=True)
            st.dataframe(pose_table(search.path), use_container_width=True)

        st.download_button(
            "Download SVG",
            data=render_artifacts_svg(artifacts),
            file_name=f"{artifacts.scenario.name}_{artifacts.scenario.mode.value}.svg",
            mime="image/svg+xml",
            key=f"svg_{artifacts.scenario.mode.value}",
        )

    def render_comparison_section(self, results: Dict[str, PlanArtifacts]):
        st.header("Corridor vs full space")
        report = BenchmarkReport()
        for artifacts in results.values():
            append_run(report, artifacts, 0)

        calc = MetricsCalculator(report)
        comparison = calc.comparison()
        if comparison is not None:
            col1, col2, col3 = st.columns(3)
            with col1:
                st.metric("Expansion reduction", f"{comparison.mean_expansion_reduction_pct:.1f}%")
            with col2:
                st.metric("Graph size reduction", f"{comparison.mean_graph_size_reduction_pct:.1f}%")
            with col3:
                st.metric("Equal path cost", "yes" if comparison.equal_cost_pairs else "no")

        search = calc.search_frame()
        col1, col2 = st.columns(2)
        with col1:
            st.plotly_chart(comparison_chart(search, "expansions"), use_container_width=True)
        with col2:
            st.plotly_chart(comparison_chart(search, "planning_time_ms"), use_container_width=True)
        st.dataframe(search, use_container_width=True)
        st.download_button("Download CSV", data=search.to_csv(index=False).encode("utf-8"),
                           file_name="comparison.csv", mime="text/csv")


def main():
    app = PlannerApp()
    app.run()


if __name__ == "__main__":
    main()
