from .base import SearchAlgorithm
from .planners import CorridorLatticePlanner, FullSpaceLatticePlanner, SEARCH_ALGORITHMS
from .gvd import build_gvd, update_gvd, clearance_at, point_clearance
from .corridor import (
    nearest_gvd_cell,
    voronoi_astar,
    shortest_voronoi_path,
    near_optimal_voronoi_cells,
    build_corridor,
    full_space_corridor,
)
from .field import distance_to_voronoi, rho_v, build_field
from .primitives import generate_primitives, compute_swath
from .lattice import primitive_time, primitive_cost, build_h2d, plan
from .qp_solver import solve_box_qp
from .smoother import build_reference, assemble_qp, smooth
from .trajectory import fit_spline, curvature_at, plan_velocity, compute_metrics

__all__ = [
    "SearchAlgorithm",
    "CorridorLatticePlanner",
    "FullSpaceLatticePlanner",
    "SEARCH_ALGORITHMS",
    "build_gvd",
    "update_gvd",
    "clearance_at",
    "point_clearance",
    "nearest_gvd_cell",
    "voronoi_astar",
    "shortest_voronoi_path",
    "near_optimal_voronoi_cells",
    "build_corridor",
    "full_space_corridor",
    "distance_to_voronoi",
    "rho_v",
    "build_field",
    "generate_primitives",
    "compute_swath",
    "primitive_time",
    "primitive_cost",
    "build_h2d",
    "plan",
    "solve_box_qp",
    "build_reference",
    "assemble_qp",
    "smooth",
    "fit_spline",
    "curvature_at",
    "plan_velocity",
    "compute_metrics",
]
