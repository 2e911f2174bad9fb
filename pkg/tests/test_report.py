from pathlib import Path

import pytest

from app.config import RunConfig
from app.db.enums import DecidedBy
from app.domain import Prediction
from app.errors import EvalError
from app.eval import build_report, load_report, render_table, report_json, write_report
from app.pipeline.pipeline_schemas import (
    Attempt,
    ClassificationOutcome,
    CompletionTrace,
    ItemResult,
)


def perfect_results(dataset) -> list[ItemResult]:
    results = []
    for item in dataset.items("test"):
        prediction = Prediction.from_records(item.product, item.promotion)
        results.append(
            ItemResult(
                item_id=item.item_id,
                outcome=ClassificationOutcome(
                    label=item.label,
                    votes={item.label: 5},
                    decided_by=DecidedBy.MAJORITY,
                    hits=[],
                ),
                trace=CompletionTrace(
                    prediction=prediction,
                    input_tokens=1000,
                    output_tokens=100,
                    elapsed=0.5,
                    attempts=[Attempt(n_samples=2, all_null=False)],
                ),
            )
        )
    return results


def test_report_round_trip(dataset, tmp_path: Path):
    config = RunConfig(run_name="baseline", prices={"input": 1e-6, "output": 2e-6})
    report = build_report(perfect_results(dataset), dataset, config)
    assert report.run_name == "baseline"
    assert report.errors.n_items == 4
    assert report.costs.total_cost == pytest.approx(4 * (1000e-6 + 200e-6))
    assert report.metadata.avg_elapsed_seconds == 0.5
    assert report.metadata.generated_at is not None

    path = write_report(report, tmp_path / "out" / "baseline.json")
    loaded = load_report(path)
    assert loaded.scorecard == report.scorecard
    assert loaded.costs.total_cost == report.costs.total_cost


def test_reports_of_identical_runs_differ_only_in_metadata(dataset):
    config = RunConfig(run_name="baseline")
    results = perfect_results(dataset)
    first = build_report(results, dataset, config)
    second = build_report(results, dataset, config)
    assert report_json(first.model_copy(update={"metadata": second.metadata})) == report_json(
        second
    )


def test_load_report_errors(tmp_path: Path):
    with pytest.raises(EvalError):
        load_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(EvalError):
        load_report(bad)


def test_table_has_one_column_per_run(dataset):
    results = perfect_results(dataset)
    a = build_report(results, dataset, RunConfig(run_name="k5"))
    b = build_report(results[:2], dataset, RunConfig(run_name="k1-with-descriptions"))
    table = render_table([a, b])
    lines = table.splitlines()
    assert lines[0].split() == ["target", "k5", "k1-with-descriptions"]
    assert set(lines[1]) <= {"-", " "}
    brand = next(line for line in lines if line.startswith("brand"))
    # The second run left half of the test items without a result
    assert brand.split() == ["brand", "100.0%", "50.0%"]
    items = next(line for line in lines if line.startswith("items"))
    assert items.split() == ["items", "4", "2"]
    assert any(line.startswith("GTINs (union)") for line in lines)
    assert render_table([]) == ""
