"""Per-target comparison rules. All pure."""

import re
from typing import Any, Collection, Iterable, Optional

from app.domain import Gtin


def _normalize(text: str) -> str:
    return re.sub(r"\s+", " ", text.casefold()).strip()


def match_substring(predicted: Optional[str], gt_values: Iterable[str]) -> bool:
    """True iff the prediction occurs in one of the GT values.

    Case-folded with whitespace collapsed; an empty prediction never matches.

    Example:
        >>> match_substring("LOreal", ["LOreal", "Men Expert"])
        True
    """
    if not predicted or not _normalize(predicted):
        return False
    needle = _normalize(predicted)
    return any(needle in _normalize(value) for value in gt_values)


def match_exact(predicted: Any, gt: Any) -> bool:
    """Equality; two absent values match, one absent value does not."""
    if predicted is None or gt is None:
        return predicted is None and gt is None
    return predicted == gt


def match_gtin_exact_set(predicted: Iterable[Gtin], gt: Iterable[Gtin]) -> bool:
    return set(predicted) == set(gt)


def match_gtin_union(predicted: Iterable[Gtin], class_union: Collection[Gtin]) -> bool:
    """Every predicted GTIN belongs to the class union; empty predictions fail."""
    predicted = set(predicted)
    return bool(predicted) and predicted <= set(class_union)


def match_gtin_any(predicted: Iterable[Gtin], gt: Iterable[Gtin]) -> bool:
    return not set(predicted).isdisjoint(gt)
