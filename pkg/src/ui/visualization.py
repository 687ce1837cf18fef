#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import io
from typing import Iterable, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pandas as pd
import plotly.graph_objects as go
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.collections import PatchCollection
from matplotlib.colors import ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle
from plotly.subplots import make_subplots

from ..models import (
    CellState,
    GvdMap,
    OccupancyGrid,
    Pose,
    SearchResult,
    VelocityProfile,
    VoronoiCorridor,
    VoronoiField,
)
from ..utils.metrics import mode_label
from ..utils.pipeline import PlanArtifacts

# group ids written into the SVG, one per drawn layer
LAYER_IDS = ("occupancy", "voronoi", "corridor", "visited", "searched_path", "smoothed_path", "footprint")

SEARCH_COLOR = "#2ca02c"
SMOOTH_COLOR = "#d62728"
VORONOI_COLOR = "#1f77b4"
CORRIDOR_COLOR = "#ffdd57"
VISITED_COLOR = "#9467bd"

_OCCUPANCY_CMAP = ListedColormap(["#ffffff", "#222222", "#bdbdbd"])


def _extent(grid: OccupancyGrid) -> Tuple[float, float, float, float]:
    ox, oy = grid.origin
    w, h = grid.size_meters
    return (ox, ox + w, oy, oy + h)


def _overlay(mask: np.ndarray, color: str, alpha: float) -> np.ndarray:
    rgba = np.zeros(mask.shape + (4,), dtype=float)
    rgba[mask] = matplotlib.colors.to_rgba(color, alpha)
    return rgba


def _cell_centers(grid: OccupancyGrid, cells: Iterable[Tuple[int, int]]) -> np.ndarray:
    arr = np.asarray(sorted(cells), dtype=float).reshape(-1, 2)
    return np.column_stack([
        grid.origin[0] + (arr[:, 0] + 0.5) * grid.resolution,
        grid.origin[1] + (arr[:, 1] + 0.5) * grid.resolution,
    ])


def _headings(points: np.ndarray) -> np.ndarray:
    d = np.diff(points, axis=0)
    theta = np.arctan2(d[:, 1], d[:, 0])
    return np.append(theta, theta[-1]) if theta.size else np.zeros(len(points))


def footprint_patches(points: np.ndarray, half_width: float, every: int = 5) -> list:
    """Square footprints of side 2*half_width centred on every `every`-th vertex"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0 or half_width <= 0:
        return []
    theta = _headings(points)
    idx = sorted(set(range(0, len(points), max(1, every))) | {len(points) - 1})
    patches = []
    for i in idx:
        c, s = np.cos(theta[i]), np.sin(theta[i])
        # lower-left corner of the rotated square
        corner = points[i] - half_width * np.array([c - s, s + c])
        patches.append(Rectangle(tuple(corner), 2 * half_width, 2 * half_width,
                                 angle=float(np.degrees(theta[i]))))
    return patches


def render_svg(grid: OccupancyGrid,
               gvd: Optional[GvdMap] = None,
               corridor: Optional[VoronoiCorridor] = None,
               search: Optional[SearchResult] = None,
               smoothed: Optional[np.ndarray] = None,
               footprint: Optional[float] = None,
               show_visited: bool = True,
               width_inches: float = 8.0) -> str:
    """
    Draw the planning layers of one run as an SVG document

    Every layer is written as a `<g id=...>` group named after LAYER_IDS;
    layers without data are left out, so an empty map yields only the
    occupancy background.
    """
    w_m, h_m = grid.size_meters
    fig = Figure(figsize=(width_inches, max(1.0, width_inches * h_m / w_m)))
    FigureCanvasAgg(fig)
    ax = fig.add_axes([0.0, 0.0, 1.0, 1.0])
    ax.set_axis_off()
    extent = _extent(grid)

    ax.imshow(grid.cells, origin="lower", extent=extent, cmap=_OCCUPANCY_CMAP,
              vmin=CellState.FREE.value, vmax=CellState.UNKNOWN.value,
              interpolation="nearest", gid="occupancy")

    if corridor is not None and not corridor.is_full_space and corridor.mask.any():
        ax.imshow(_overlay(corridor.mask, CORRIDOR_COLOR, 0.35), origin="lower", extent=extent,
                  interpolation="nearest", gid="corridor")

    if gvd is not None and gvd.is_voronoi.any():
        ax.imshow(_overlay(gvd.is_voronoi, VORONOI_COLOR, 0.9), origin="lower", extent=extent,
                  interpolation="nearest", gid="voronoi")

    if search is not None and show_visited and search.expanded_cells:
        centers = _cell_centers(grid, search.expanded_cells)
        ax.scatter(centers[:, 0], centers[:, 1], s=1.0, c=VISITED_COLOR, alpha=0.4,
                   linewidths=0, gid="visited")

    if search is not None and len(search.path) >= 2:
        xy = np.array([(p.x, p.y) for p in search.path])
        ax.plot(xy[:, 0], xy[:, 1], color=SEARCH_COLOR, linewidth=1.5, gid="searched_path")

    if smoothed is not None and len(smoothed) >= 2:
        xy = np.asarray(smoothed, dtype=float)
        ax.plot(xy[:, 0], xy[:, 1], color=SMOOTH_COLOR, linewidth=1.5, gid="smoothed_path")
        if footprint:
            collection = PatchCollection(footprint_patches(xy, footprint), facecolor="none",
                                         edgecolor=SMOOTH_COLOR, linewidth=0.4, alpha=0.6)
            collection.set_gid("footprint")
            ax.add_collection(collection)

    ax.set_xlim(extent[0], extent[1])
    ax.set_ylim(extent[2], extent[3])
    ax.set_aspect("equal")

    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "voronoi-lattice", "svg.fonttype": "none"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def render_artifacts_svg(artifacts: PlanArtifacts, show_visited: bool = True) -> str:
    """SVG of a complete pipeline run"""
    return render_svg(
        artifacts.grid,
        gvd=artifacts.gvd,
        corridor=artifacts.corridor,
        search=artifacts.search,
        smoothed=artifacts.smoothed.vertices,
        footprint=artifacts.scenario.footprint,
        show_visited=show_visited,
    )


def _path_trace(points: Sequence[Tuple[float, float]], name: str, color: str) -> go.Scatter:
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    return go.Scatter(x=xy[:, 0], y=xy[:, 1], mode="lines", name=name, line=dict(color=color, width=2))


def map_figure(artifacts: PlanArtifacts, show_visited: bool = False, height: int = 650) -> go.Figure:
    """Occupancy map with the Voronoi diagram, corridor and both paths"""
    grid = artifacts.grid
    res = grid.resolution
    x = grid.origin[0] + (np.arange(grid.width) + 0.5) * res
    y = grid.origin[1] + (np.arange(grid.height) + 0.5) * res

    layer = np.where(grid.cells == CellState.FREE.value, 0.0, 3.0)
    if artifacts.corridor is not None and not artifacts.corridor.is_full_space:
        layer = np.where(artifacts.corridor.mask & (layer == 0), 1.0, layer)
    layer = np.where(artifacts.gvd.is_voronoi, 2.0, layer)

    fig = go.Figure()
    fig.add_trace(go.Heatmap(
        x=x, y=y, z=layer, zmin=0, zmax=3, showscale=False, hoverinfo="skip",
        colorscale=[[0.0, "#ffffff"], [0.25, "#ffffff"], [0.25, CORRIDOR_COLOR], [0.5, CORRIDOR_COLOR],
                    [0.5, VORONOI_COLOR], [0.75, VORONOI_COLOR], [0.75, "#222222"], [1.0, "#222222"]],
    ))
    if show_visited and artifacts.search.expanded_cells:
        centers = _cell_centers(grid, artifacts.search.expanded_cells)
        fig.add_trace(go.Scatter(x=centers[:, 0], y=centers[:, 1], mode="markers", name="Visited cells",
                                 marker=dict(size=2, color=VISITED_COLOR, opacity=0.4)))
    fig.add_trace(_path_trace([(p.x, p.y) for p in artifacts.search.path], "Searched path", SEARCH_COLOR))
    fig.add_trace(_path_trace(artifacts.smoothed.vertices, "Smoothed path", SMOOTH_COLOR))

    fig.update_layout(
        title=f"{artifacts.scenario.name} - {mode_label(artifacts.scenario.mode.value)}",
        height=height,
        xaxis=dict(title="x [m]"),
        yaxis=dict(title="y [m]", scaleanchor="x", scaleratio=1),
        legend=dict(orientation="h", y=-0.1),
    )
    return fig


def field_heatmap(field: VoronoiField, grid: OccupancyGrid, height: int = 600) -> go.Figure:
    """Voronoi field potential over the corridor (NaN outside)"""
    res = grid.resolution
    z = np.where(field.mask, field.rho, np.nan)
    fig = go.Figure(go.Heatmap(
        x=grid.origin[0] + (np.arange(grid.width) + 0.5) * res,
        y=grid.origin[1] + (np.arange(grid.height) + 0.5) * res,
        z=z, zmin=0.0, zmax=1.0, colorscale="Viridis", colorbar=dict(title="rho"),
    ))
    fig.update_layout(title="Voronoi field", height=height,
                      yaxis=dict(scaleanchor="x", scaleratio=1))
    return fig


def velocity_figure(profile: VelocityProfile, height: int = 450) -> go.Figure:
    """Speed and speed limit against arc length, curvature on a second row"""
    cap = np.minimum(profile.speed_cap, profile.v_max * 1.05)
    fig = make_subplots(rows=2, cols=1, shared_xaxes=True, vertical_spacing=0.08,
                        subplot_titles=("Velocity profile", "Curvature"))
    fig.add_trace(go.Scatter(x=profile.s, y=profile.v, name="v(s)", line=dict(color=SMOOTH_COLOR)), row=1, col=1)
    fig.add_trace(go.Scatter(x=profile.s, y=cap, name="limit", line=dict(color="gray", dash="dot")), row=1, col=1)
    fig.add_trace(go.Scatter(x=profile.s, y=profile.curvature, name="kappa(s)",
                             line=dict(color=VORONOI_COLOR)), row=2, col=1)
    fig.update_xaxes(title_text="s [m]", row=2, col=1)
    fig.update_yaxes(title_text="v [m/s]", row=1, col=1)
    fig.update_yaxes(title_text="kappa [1/m]", row=2, col=1)
    fig.update_layout(height=height, showlegend=True)
    return fig


def comparison_chart(search_frame: pd.DataFrame, metric: str = "expansions", height: int = 400) -> go.Figure:
    """Grouped bars of one search metric per scenario, one bar per mode"""
    fig = go.Figure()
    if search_frame.empty:
        return fig
    means = search_frame.groupby(["scenario", "mode"])[metric].mean().reset_index()
    for mode, rows in means.groupby("mode"):
        fig.add_trace(go.Bar(x=rows["scenario"], y=rows[metric], name=mode_label(mode)))
    fig.update_layout(barmode="group", title=metric.replace("_", " ").capitalize(), height=height)
    return fig


def pose_table(poses: Sequence[Pose]) -> pd.DataFrame:
    return pd.DataFrame([p.as_tuple() for p in poses], columns=["x", "y", "theta"])
