import pytest

from app.domain import Prediction
from app.errors import EvalError
from app.eval import cost_report
from app.pipeline.pipeline_schemas import Attempt, CompletionTrace

PRICE_IN = 0.15e-6
PRICE_OUT = 0.60e-6


def trace(input_tokens: int, output_tokens: int, elapsed: float = 1.0) -> CompletionTrace:
    return CompletionTrace(
        prediction=Prediction(),
        input_tokens=input_tokens,
        output_tokens=output_tokens,
        elapsed=elapsed,
        attempts=[Attempt(n_samples=3, all_null=True)],
    )


def test_full_test_split_cost():
    report = cost_report([trace(92_888, 90)] * 1101, PRICE_IN, PRICE_OUT)
    assert report.n_traces == 1101
    assert report.avg_input_tokens == 92_888
    assert report.avg_total_tokens == 92_978
    assert report.total_cost == pytest.approx(15.40, abs=0.01)
    assert report.total_cost == pytest.approx(15.28, rel=0.02)


def test_averages_and_totals_agree():
    traces = [trace(1000, 10, 2.0), trace(3000, 30, 4.0), trace(500, 5, 0.0)]
    report = cost_report(traces, PRICE_IN, PRICE_OUT)
    assert report.avg_input_tokens == 1500
    assert report.avg_output_tokens == 15
    assert report.avg_total_tokens == report.avg_input_tokens + report.avg_output_tokens
    assert report.avg_elapsed_seconds == 2.0
    assert report.total_cost == pytest.approx(
        3 * (report.avg_input_tokens * PRICE_IN + report.avg_output_tokens * PRICE_OUT)
    )


def test_no_traces():
    report = cost_report([], PRICE_IN, PRICE_OUT)
    assert report.n_traces == 0
    assert report.total_cost == 0.0


def test_negative_price():
    with pytest.raises(EvalError):
        cost_report([trace(1, 1)], -1.0, PRICE_OUT)


def test_elapsed_time_is_not_serialized():
    dumped = cost_report([trace(10, 1, 3.0)], PRICE_IN, PRICE_OUT).model_dump()
    assert "avg_elapsed_seconds" not in dumped
