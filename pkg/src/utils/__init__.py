from .pipeline import PipelineConfig, PipelineStatus, PlanArtifacts, PlanningPipeline, plan_end_to_end, truncate_path
from .benchmark import PAIRED_MODES, run_benchmark
from .metrics import MetricsCalculator, drop_timing_columns
from .export import ResultExporter

__all__ = [
    "PipelineConfig",
    "PipelineStatus",
    "PlanArtifacts",
    "PlanningPipeline",
    "plan_end_to_end",
    "truncate_path",
    "PAIRED_MODES",
    "run_benchmark",
    "MetricsCalculator",
    "drop_timing_columns",
    "ResultExporter",
]
