from .errors import (
    PlannerError,
    MapFormatError,
    MapStructureError,
    CellRangeError,
    IsolatedCellError,
    NoVoronoiRouteError,
    FieldDomainError,
    PrimitiveGenerationError,
    PrimitiveFileError,
    NoPathError,
    PreconditionError,
    ReferenceIntegrityError,
    SearchIntegrityError,
    QpSizeError,
    QpNumericError,
    DegenerateKnotError,
    CurvatureSingularityError,
    VelocityInfeasibleError,
    StalledProfileError,
    MazeParameterError,
    ScenarioError,
    PipelineStageError,
)
from .grid import CellState, UnknownPolicy, CellIndex, OccupancyGrid, world_to_cell, cell_to_world, is_traversable
from .gvd_map import GvdMap, MapDelta, INF_SQ_DIST, NO_OBSTACLE
from .corridor import VoronoiPath, VoronoiCorridor
from .field import VoronoiField
from .primitive import (
    NUM_HEADINGS,
    HEADING_VECTORS,
    Pose,
    PrimitiveKind,
    MotionPrimitive,
    PrimitiveSet,
    PrimitiveConfig,
    normalize_angle,
    heading_angle,
    angle_difference,
    nearest_heading,
)
from .search import SearchMode, LatticeState, SpeedLimits, HeuristicMap, SearchResult
from .path import SolverStatus, SmootherConfig, ReferencePath, BoxQp, QpSolution, SmoothedPath
from .trajectory import PathSpline, VelocityProfile, PathMetrics
from .scenario import MazeSpec, Scenario, BenchmarkReport

__all__ = [
    "PlannerError",
    "MapFormatError",
    "MapStructureError",
    "CellRangeError",
    "IsolatedCellError",
    "NoVoronoiRouteError",
    "FieldDomainError",
    "PrimitiveGenerationError",
    "PrimitiveFileError",
    "NoPathError",
    "PreconditionError",
    "ReferenceIntegrityError",
    "SearchIntegrityError",
    "QpSizeError",
    "QpNumericError",
    "DegenerateKnotError",
    "CurvatureSingularityError",
    "VelocityInfeasibleError",
    "StalledProfileError",
    "MazeParameterError",
    "ScenarioError",
    "PipelineStageError",
    "CellState",
    "UnknownPolicy",
    "CellIndex",
    "OccupancyGrid",
    "world_to_cell",
    "cell_to_world",
    "is_traversable",
    "GvdMap",
    "MapDelta",
    "INF_SQ_DIST",
    "NO_OBSTACLE",
    "VoronoiPath",
    "VoronoiCorridor",
    "VoronoiField",
    "NUM_HEADINGS",
    "HEADING_VECTORS",
    "Pose",
    "PrimitiveKind",
    "MotionPrimitive",
    "PrimitiveSet",
    "PrimitiveConfig",
    "normalize_angle",
    "heading_angle",
    "angle_difference",
    "nearest_heading",
    "SearchMode",
    "LatticeState",
    "SpeedLimits",
    "HeuristicMap",
    "SearchResult",
    "SolverStatus",
    "SmootherConfig",
    "ReferencePath",
    "BoxQp",
    "QpSolution",
    "SmoothedPath",
    "PathSpline",
    "VelocityProfile",
    "PathMetrics",
    "MazeSpec",
    "Scenario",
    "BenchmarkReport",
]
