from typing import Optional


class PlannerError(Exception):
    """Base class for every error raised by the planner"""
    pass


class MapFormatError(PlannerError):
    """Malformed map header or sidecar"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MapStructureError(PlannerError):
    """Map payload inconsistent with its declared dimensions"""
    pass


class CellRangeError(PlannerError):
    """Cell index or world point outside the grid"""
    pass


class IsolatedCellError(PlannerError):
    """No reachable Voronoi cell from a start/goal cell"""
    pass


class FieldDomainError(PlannerError):
    """Voronoi potential evaluated outside its domain"""
    pass


class PrimitiveGenerationError(PlannerError):
    pass


class PrimitiveFileError(PlannerError):
    pass


class NoPathError(PlannerError):
    """Lattice open list exhausted"""

    def __init__(self, message: str, expansions: int = 0):
        self.expansions = expansions
        super().__init__(f"{message} (expansions={expansions})")


class NoVoronoiRouteError(NoPathError):
    """Two Voronoi cells lie on disconnected GVD components"""

    def __init__(self, message: str):
        self.expansions = 0
        PlannerError.__init__(self, message)


class PreconditionError(PlannerError):
    pass


class ReferenceIntegrityError(PlannerError):
    """Reference path vertex closer to an obstacle than r_c"""
    pass


class SearchIntegrityError(PlannerError):
    """Search result leaves its corridor or breaks the cost bounds"""
    pass


class QpSizeError(PlannerError):
    pass


class QpNumericError(PlannerError):
    pass


class DegenerateKnotError(PlannerError):
    pass


class CurvatureSingularityError(PlannerError):
    pass


class VelocityInfeasibleError(PlannerError):
    """Boundary speed cannot be met; `end` is "start" or "end"."""

    def __init__(self, message: str, end: str):
        self.end = end
        super().__init__(f"{end}: {message}")


class StalledProfileError(PlannerError):
    pass


class MazeParameterError(PlannerError):
    pass


class ScenarioError(PlannerError):
    pass


class PipelineStageError(PlannerError):
    """Wraps an error raised inside one pipeline stage"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
