"""Token and cost accounting."""

from typing import Sequence

from app.errors import EvalError
from app.eval.eval_schemas import CostReport
from app.pipeline.pipeline_schemas import CompletionTrace


def cost_report(
    traces: Sequence[CompletionTrace], price_in: float, price_out: float
) -> CostReport:
    """Averages per trace and total cost; prices are currency per token.

    Example:
        1,101 traces of 92,888 input and 90 output tokens at 0.15e-6 / 0.60e-6
        cost about 15.40 in total.
    """
    if price_in < 0 or price_out < 0:
        raise EvalError("token prices must be >= 0")
    n = len(traces)
    if not n:
        return CostReport(price_in=price_in, price_out=price_out)
    total_in = sum(t.input_tokens for t in traces)
    total_out = sum(t.output_tokens for t in traces)
    avg_in, avg_out = total_in / n, total_out / n
    return CostReport(
        n_traces=n,
        avg_input_tokens=avg_in,
        avg_output_tokens=avg_out,
        avg_total_tokens=avg_in + avg_out,
        avg_elapsed_seconds=sum(t.elapsed for t in traces) / n,
        total_cost=sum(t.input_tokens * price_in + t.output_tokens * price_out for t in traces),
        price_in=price_in,
        price_out=price_out,
    )
