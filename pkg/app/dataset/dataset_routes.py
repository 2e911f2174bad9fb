"""Endpoints for dataset items and class labels."""

from typing import Annotated, Optional

from fastapi import APIRouter, Depends, Query

from app.dataset.dataset_crud import get_paginated_items
from app.dataset.dataset_deps import get_dataset, get_item
from app.dataset.dataset_schemas import (
    ClassLabelOut,
    DatasetItem,
    DatasetStats,
    PaginatedItems,
)
from app.dataset.dataset_store import Dataset
from app.db.enums import Split

router = APIRouter(
    tags=["dataset"],
    responses={404: {"description": "Not found"}},
)


@router.get("/items", response_model=PaginatedItems)
async def get_items(
    dataset: Annotated[Dataset, Depends(get_dataset)],
    page: int = Query(1, ge=1),
    results_per_page: int = Query(13, ge=1, le=100),
    label: Optional[str] = None,
    split: Optional[Split] = None,
):
    """Get dataset items, paginated."""
    return get_paginated_items(dataset, page, results_per_page, label, split)


@router.get("/items/stats", response_model=DatasetStats)
async def get_item_stats(dataset: Annotated[Dataset, Depends(get_dataset)]):
    """Item counts per split and class."""
    return dataset.stats()


@router.get("/items/{item_id}", response_model=DatasetItem)
async def get_item_by_id(item: Annotated[DatasetItem, Depends(get_item)]):
    return item


@router.get("/labels/{label}/gtins", response_model=ClassLabelOut)
async def get_label_gtins(
    label: str, dataset: Annotated[Dataset, Depends(get_dataset)]
):
    """The union of GTINs over every item of a class."""
    return ClassLabelOut.from_label(dataset.class_label(label))
