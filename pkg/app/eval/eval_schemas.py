from datetime import datetime
from typing import Optional

from pydantic import BaseModel, Field, computed_field

from app.db.enums import GtinMetric, MatchRule


class TargetScore(BaseModel):
    n_correct: int = 0
    n_total: int = 0
    rule: MatchRule

    @computed_field
    @property
    def accuracy(self) -> Optional[float]:
        if not self.n_total:
            return None
        return self.n_correct / self.n_total


class TargetScorecard(BaseModel):
    """Accuracy per target under its rule.

    ``gtin_measures`` scores GTINs under every GTIN rule, ``targets["GTINs"]``
    under the configured one.
    """

    gtin_metric: GtinMetric
    targets: dict[str, TargetScore]
    class_label: TargetScore
    gtin_measures: dict[GtinMetric, TargetScore]


class CostReport(BaseModel):
    """Token and cost averages over completed items, all attempts summed."""

    n_traces: int = 0
    avg_input_tokens: float = 0.0
    avg_output_tokens: float = 0.0
    avg_total_tokens: float = 0.0
    # Wall time differs between identical runs, reported under metadata
    avg_elapsed_seconds: float = Field(default=0.0, exclude=True)
    total_cost: float = 0.0
    price_in: float = 0.0
    price_out: float = 0.0


class ErrorSummary(BaseModel):
    n_items: int = 0
    n_failed: int = 0
    failed_by_stage: dict[str, int] = Field(default_factory=dict)
    n_reduced_context: int = 0
    n_all_null: int = 0


class ReportMetadata(BaseModel):
    generated_at: Optional[datetime] = None
    avg_elapsed_seconds: float = 0.0


class EvalReport(BaseModel):
    run_name: str
    scorecard: TargetScorecard
    costs: CostReport
    errors: ErrorSummary
    metadata: ReportMetadata = ReportMetadata()
