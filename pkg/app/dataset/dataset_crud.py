"""Read helpers behind the dataset endpoints."""

from typing import Optional

from app.dataset.dataset_schemas import PaginatedItems
from app.dataset.dataset_store import Dataset
from app.db.enums import Split
from app.db.utils import get_pagination


def get_paginated_items(
    dataset: Dataset,
    page: int,
    results_per_page: int,
    label: Optional[str] = None,
    split: Optional[Split] = None,
) -> PaginatedItems:
    """One page of items in ingest order, optionally of one label and split."""
    items = [
        item for item in dataset.items(split) if label is None or item.label == label
    ]
    start = (page - 1) * results_per_page
    return PaginatedItems(
        results=items[start : start + results_per_page],
        pagination=get_pagination(page, results_per_page, len(items)),
    )
