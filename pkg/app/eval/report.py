"""Evaluation reports as JSON and as an aligned text table."""

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from loguru import logger as log
from pydantic import ValidationError

from app.config import RunConfig
from app.dataset.dataset_store import Dataset
from app.errors import EvalError
from app.eval.costs import cost_report
from app.eval.eval_schemas import EvalReport, ReportMetadata, TargetScore
from app.eval.scoring import TARGETS, score_run, summarize_errors
from app.pipeline.pipeline_schemas import ItemResult


def build_report(
    results: Sequence[ItemResult], dataset: Dataset, config: RunConfig
) -> EvalReport:
    scorecard = score_run(results, dataset, config.gtin_metric)
    costs = cost_report(
        [r.trace for r in results if r.trace is not None],
        config.prices.input,
        config.prices.output,
    )
    errors = summarize_errors(results)
    if errors.n_failed:
        log.warning(f"{errors.n_failed} of {errors.n_items} items failed: {errors.failed_by_stage}")
    return EvalReport(
        run_name=config.run_name,
        scorecard=scorecard,
        costs=costs,
        errors=errors,
        metadata=ReportMetadata(
            generated_at=datetime.now(timezone.utc),
            avg_elapsed_seconds=costs.avg_elapsed_seconds,
        ),
    )


def report_json(report: EvalReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def write_report(report: EvalReport, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report), encoding="utf-8")
    return path


def load_report(path: Path) -> EvalReport:
    try:
        return EvalReport.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValidationError, json.JSONDecodeError) as e:
        raise EvalError(f"cannot read report {path}: {e}") from e


def _percent(score: TargetScore) -> str:
    if score.accuracy is None:
        return "-"
    return f"{100 * score.accuracy:.1f}%"


def render_table(reports: Sequence[EvalReport]) -> str:
    """Rows are targets, one column per run."""
    if not reports:
        return ""
    rows: list[list[str]] = [["target", *(r.run_name for r in reports)]]
    for target in TARGETS:
        rows.append([target, *(_percent(r.scorecard.targets[target]) for r in reports)])
    rows.append(["class_label", *(_percent(r.scorecard.class_label) for r in reports)])
    for metric in reports[0].scorecard.gtin_measures:
        rows.append(
            [f"GTINs ({metric})", *(_percent(r.scorecard.gtin_measures[metric]) for r in reports)]
        )
    rows.append(["items", *(str(r.errors.n_items) for r in reports)])
    rows.append(["failed", *(str(r.errors.n_failed) for r in reports)])
    rows.append(["avg. input tokens", *(f"{r.costs.avg_input_tokens:,.0f}" for r in reports)])
    rows.append(["avg. output tokens", *(f"{r.costs.avg_output_tokens:,.0f}" for r in reports)])
    rows.append(["avg. total tokens", *(f"{r.costs.avg_total_tokens:,.0f}" for r in reports)])
    rows.append(["total cost", *(f"{r.costs.total_cost:.2f}" for r in reports)])

    widths = [max(len(row[col]) for row in rows) for col in range(len(rows[0]))]
    lines = []
    for i, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [
            cell.rjust(width) for cell, width in zip(row[1:], widths[1:])
        ]
        lines.append("  ".join(cells).rstrip())
        if i == 0:
            lines.append("  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"
