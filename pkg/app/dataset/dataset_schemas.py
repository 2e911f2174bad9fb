"""Pydantic models for dataset items and statistics."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.db.enums import Split
from app.db.utils import PaginationInfo
from app.domain import Gtin, ProductRecord, PromotionRecord


class DatasetItem(BaseModel):
    """One advertisement image with its product and promotion data."""

    model_config = ConfigDict(frozen=True)

    item_id: str = Field(min_length=1)
    image_path: Path
    split: Split
    label: str = Field(min_length=1)
    product: ProductRecord = ProductRecord()
    promotion: PromotionRecord = PromotionRecord()

    @field_validator("item_id", "label", mode="before")
    @classmethod
    def strip(cls, value):
        return str(value).strip() if value is not None else value


class ClassLabel(BaseModel):
    """A class and the union of its items' GTINs."""

    model_config = ConfigDict(frozen=True)

    id: str
    gtin_union: frozenset[Gtin] = frozenset()


class DatasetStats(BaseModel):
    """Counts returned by an ingest."""

    n_items: int = 0
    n_train: int = 0
    n_test: int = 0
    n_classes: int = 0
    per_class_train: dict[str, int] = Field(default_factory=dict)
    per_class_test: dict[str, int] = Field(default_factory=dict)


class PaginatedItems(BaseModel):
    """Dataset items + Pagination info."""

    results: list[DatasetItem]
    pagination: PaginationInfo


class ClassLabelOut(BaseModel):
    """A class label with its GTIN union, sorted."""

    id: str
    gtins: list[str]

    @classmethod
    def from_label(cls, label: ClassLabel) -> "ClassLabelOut":
        return cls(id=label.id, gtins=[g.digits for g in sorted(label.gtin_union)])
