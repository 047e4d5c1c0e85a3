from .metrics import PredictionSet, Scores, accuracy_all, accuracy_per_resident
from .repeats import RepeatSummary, repeated_runs
from .report import BenchmarkReport, GroupComparison, RowResult, render_text_report, write_reports
from .selection import Grid, GridPoint, SelectionResult, grid_search
from .timing import format_seconds, measure_time

__all__ = [
    "BenchmarkReport",
    "Grid",
    "GridPoint",
    "GroupComparison",
    "PredictionSet",
    "RepeatSummary",
    "RowResult",
    "Scores",
    "SelectionResult",
    "accuracy_all",
    "accuracy_per_resident",
    "format_seconds",
    "grid_search",
    "measure_time",
    "render_text_report",
    "repeated_runs",
    "write_reports",
]
