"""Dataset dependencies for use in Depends."""

from typing import Annotated

from fastapi import Depends, Request
from fastapi.exceptions import HTTPException

from app.dataset.dataset_schemas import DatasetItem
from app.dataset.dataset_store import Dataset
from app.db.enums import HTTPStatus
from app.errors import UnknownItem


async def get_dataset(request: Request) -> Dataset:
    """The dataset loaded at startup."""
    return request.state.dataset


async def get_item(
    item_id: str, dataset: Annotated[Dataset, Depends(get_dataset)]
) -> DatasetItem:
    """Return a dataset item, else exception.

    Raises:
        HTTPException: Raised with a 404 status code if the item is not found.
    """
    try:
        return dataset.get(item_id)
    except UnknownItem as e:
        raise HTTPException(status_code=HTTPStatus.NOT_FOUND, detail=str(e)) from e
