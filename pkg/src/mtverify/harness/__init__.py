"""Verification harness: plans, subjects, runner, reports."""

from .cache import ResultCache, cache_key, digest_dataset
from .plan import RunPlan, load_plan, save_plan
from .report import emit_loss_curves, emit_report, render_summary, render_text, summarize
from .runner import (
    CLEAN_ROW,
    KillMatrix,
    SuiteResult,
    load_matrix,
    load_plan_data,
    run_suite,
    save_matrix,
)
from .subjects import CnnSubject, SvmSubject, build_subject

__all__ = [
    "CLEAN_ROW",
    "CnnSubject",
    "KillMatrix",
    "ResultCache",
    "RunPlan",
    "SuiteResult",
    "SvmSubject",
    "build_subject",
    "cache_key",
    "digest_dataset",
    "emit_loss_curves",
    "emit_report",
    "load_matrix",
    "load_plan",
    "load_plan_data",
    "render_summary",
    "render_text",
    "run_suite",
    "save_matrix",
    "save_plan",
    "summarize",
]
