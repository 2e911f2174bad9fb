"""Accuracy per target over a run's results."""

from collections import Counter
from typing import Callable, Optional, Sequence

from loguru import logger as log

from app.dataset.dataset_schemas import DatasetItem
from app.dataset.dataset_store import Dataset
from app.db.enums import DifferentSorts, GtinMetric, MatchRule, Split
from app.domain import Gtin, Prediction
from app.errors import EvalError, UnknownItem
from app.eval.eval_schemas import ErrorSummary, TargetScore, TargetScorecard
from app.eval.matchers import (
    match_exact,
    match_gtin_any,
    match_gtin_exact_set,
    match_gtin_union,
    match_substring,
)
from app.pipeline.pipeline_schemas import ItemResult

TARGETS = (
    "brand",
    "product_category",
    "product_weight",
    "GTINs",
    "different_sorts",
    "price",
    "regular_price",
    "relative_discount",
    "absolute_discount",
)


def _brand(p: Prediction, item: DatasetItem, _: Dataset) -> bool:
    gt = item.product.brand
    if gt is None:
        return p.brand is None
    return match_substring(p.brand, [gt])


def _category(p: Prediction, item: DatasetItem, _: Dataset) -> bool:
    """Every predicted category must be a substring of some GT category."""
    gt = item.product.product_category
    if not gt:
        return not p.product_category
    return bool(p.product_category) and all(
        match_substring(entry, gt) for entry in p.product_category
    )


def _weight(p: Prediction, item: DatasetItem, _: Dataset) -> bool:
    """Number and unit are matched separately, a lone number is not absent."""
    gt = item.product.weight
    return match_exact(p.weight_number, gt.number if gt else None) and match_exact(
        p.weight_unit, gt.unit if gt else None
    )


def _known_sorts(value: Optional[DifferentSorts]) -> Optional[DifferentSorts]:
    return None if value == DifferentSorts.UNKNOWN else value


def _sorts(p: Prediction, item: DatasetItem, _: Dataset) -> bool:
    """UNKNOWN on either side counts as absent."""
    return match_exact(
        _known_sorts(p.different_sorts), _known_sorts(item.product.different_sorts)
    )


def _promotion(field: str) -> Callable[[Prediction, DatasetItem, Dataset], bool]:
    def check(p: Prediction, item: DatasetItem, _: Dataset) -> bool:
        return match_exact(getattr(p, field), getattr(item.promotion, field))

    return check


def gtin_match(
    metric: GtinMetric, predicted: Sequence[Gtin], item: DatasetItem, dataset: Dataset
) -> bool:
    if metric == GtinMetric.UNION:
        return match_gtin_union(predicted, dataset.class_gtin_union(item.label))
    if metric == GtinMetric.ANY:
        return match_gtin_any(predicted, item.product.gtins)
    return match_gtin_exact_set(predicted, item.product.gtins)


_CHECKS: dict[str, tuple[MatchRule, Callable[[Prediction, DatasetItem, Dataset], bool]]] = {
    "brand": (MatchRule.SUBSTRING, _brand),
    "product_category": (MatchRule.SUBSTRING, _category),
    "product_weight": (MatchRule.EXACT, _weight),
    "different_sorts": (MatchRule.EXACT, _sorts),
    "price": (MatchRule.EXACT, _promotion("price")),
    "regular_price": (MatchRule.EXACT, _promotion("regular_price")),
    "relative_discount": (MatchRule.EXACT, _promotion("relative_discount")),
    "absolute_discount": (MatchRule.EXACT, _promotion("absolute_discount")),
}


def _results_by_item(results: Sequence[ItemResult], dataset: Dataset) -> dict[str, ItemResult]:
    by_item: dict[str, ItemResult] = {}
    for result in results:
        if result.item_id in by_item:
            raise EvalError(f"more than one trace for item {result.item_id!r}")
        try:
            item = dataset.get(result.item_id)
        except UnknownItem as e:
            raise EvalError(f"trace for unknown item {result.item_id!r}") from e
        if item.split != Split.TEST:
            raise EvalError(f"trace for train item {result.item_id!r}")
        by_item[result.item_id] = result
    return by_item


def score_run(
    results: Sequence[ItemResult],
    dataset: Dataset,
    gtin_metric: GtinMetric = GtinMetric.EXACT_SET,
) -> TargetScorecard:
    """Score every test item of the dataset.

    A failed item, or a test item without a result, is wrong on every target.
    """
    by_item = _results_by_item(results, dataset)
    items = dataset.items(Split.TEST)
    n_total = len(items)
    n_missing = n_total - len(by_item)
    if n_missing:
        log.warning(f"{n_missing} of {n_total} test items have no result")
    correct: Counter[str] = Counter()
    gtin_correct: Counter[GtinMetric] = Counter()
    n_label = 0

    for item in items:
        result = by_item.get(item.item_id)
        if result is None:
            continue
        if result.outcome is not None and result.outcome.label == item.label:
            n_label += 1
        if not result.ok:
            continue
        prediction = result.trace.prediction
        for target, (_, check) in _CHECKS.items():
            correct[target] += check(prediction, item, dataset)
        for metric in GtinMetric:
            gtin_correct[metric] += gtin_match(metric, prediction.gtins, item, dataset)

    targets: dict[str, TargetScore] = {}
    for target in TARGETS:
        if target == "GTINs":
            targets[target] = TargetScore(
                n_correct=gtin_correct[gtin_metric], n_total=n_total, rule=gtin_metric.rule
            )
        else:
            rule = _CHECKS[target][0]
            targets[target] = TargetScore(
                n_correct=correct[target], n_total=n_total, rule=rule
            )
    return TargetScorecard(
        gtin_metric=gtin_metric,
        targets=targets,
        class_label=TargetScore(n_correct=n_label, n_total=n_total, rule=MatchRule.EXACT),
        gtin_measures={
            metric: TargetScore(
                n_correct=gtin_correct[metric], n_total=n_total, rule=metric.rule
            )
            for metric in GtinMetric
        },
    )


def summarize_errors(results: Sequence[ItemResult]) -> ErrorSummary:
    by_stage = Counter(r.error.stage for r in results if r.error is not None)
    completed = [r.trace for r in results if r.trace is not None]
    return ErrorSummary(
        n_items=len(results),
        n_failed=sum(by_stage.values()),
        failed_by_stage=dict(sorted(by_stage.items())),
        n_reduced_context=sum(1 for t in completed if t.reduced),
        n_all_null=sum(1 for t in completed if t.prediction.is_all_null),
    )
