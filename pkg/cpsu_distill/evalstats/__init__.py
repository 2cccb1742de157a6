"""Init module."""

from .summary import (
    BoxplotStats,
    EvalSummary,
    HistogramSpec,
    boxplot_stats,
    histogram,
    iqr_bounds,
    quartiles,
    summarize,
    summarize_logs,
)
from .evaluation import evaluate_policy, evaluate_summary
from .report import export_report, report_from_manifest

__all__ = [
    "EvalSummary",
    "HistogramSpec",
    "BoxplotStats",
    "boxplot_stats",
    "histogram",
    "iqr_bounds",
    "quartiles",
    "summarize",
    "summarize_logs",
    "evaluate_policy",
    "evaluate_summary",
    "export_report",
    "report_from_manifest",
]
