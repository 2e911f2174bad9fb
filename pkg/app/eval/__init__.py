"""Scoring against ground truth, cost accounting and reports."""

from app.eval.costs import cost_report
from app.eval.eval_schemas import CostReport, ErrorSummary, EvalReport, TargetScore, TargetScorecard
from app.eval.matchers import (
    match_exact,
    match_gtin_any,
    match_gtin_exact_set,
    match_gtin_union,
    match_substring,
)
from app.eval.report import build_report, load_report, render_table, report_json, write_report
from app.eval.scoring import TARGETS, score_run, summarize_errors

__all__ = [
    "TARGETS",
    "CostReport",
    "ErrorSummary",
    "EvalReport",
    "TargetScore",
    "TargetScorecard",
    "build_report",
    "cost_report",
    "load_report",
    "match_exact",
    "match_gtin_any",
    "match_gtin_exact_set",
    "match_gtin_union",
    "match_substring",
    "render_table",
    "report_json",
    "score_run",
    "summarize_errors",
    "write_report",
]
