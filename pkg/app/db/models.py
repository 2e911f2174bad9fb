from pathlib import Path
from typing import Any, Optional, Self

from loguru import logger as log
from psycopg import AsyncConnection
from psycopg.rows import class_row
from psycopg.types.json import Jsonb
from pydantic import BaseModel

from app.dataset.dataset_schemas import DatasetItem
from app.db.enums import Split
from app.errors import IngestError


class DbDatasetItem(BaseModel):
    """Table dataset_items."""

    id: Optional[int] = None  # NOTE serial, keeps insertion order
    item_id: str
    image_path: str
    split: Split
    label: str
    product: dict[str, Any]
    promotion: dict[str, Any]

    @classmethod
    def from_item(cls, item: DatasetItem) -> Self:
        return cls(
            item_id=item.item_id,
            image_path=str(item.image_path),
            split=item.split,
            label=item.label,
            product=item.product.model_dump(mode="json", by_alias=True),
            promotion=item.promotion.model_dump(mode="json"),
        )

    def to_item(self) -> DatasetItem:
        return DatasetItem(
            item_id=self.item_id,
            image_path=Path(self.image_path),
            split=self.split,
            label=self.label,
            product=self.product,
            promotion=self.promotion,
        )

    @classmethod
    async def create(cls, db: AsyncConnection, item: DatasetItem) -> Self:
        """Insert an item, replacing the row of an existing item_id."""
        row = cls.from_item(item)
        params = row.model_dump(exclude={"id"})
        params["product"] = Jsonb(row.product)
        params["promotion"] = Jsonb(row.promotion)
        async with db.cursor(row_factory=class_row(cls)) as cur:
            await cur.execute(
                """
                INSERT INTO dataset_items
                    (item_id, image_path, split, label, product, promotion)
                VALUES
                    (%(item_id)s, %(image_path)s, %(split)s, %(label)s,
                     %(product)s, %(promotion)s)
                ON CONFLICT (item_id) DO UPDATE
                SET
                    image_path = EXCLUDED.image_path,
                    split = EXCLUDED.split,
                    label = EXCLUDED.label,
                    product = EXCLUDED.product,
                    promotion = EXCLUDED.promotion
                RETURNING *;
            """,
                params,
            )
            new_row = await cur.fetchone()

        if new_row is None:
            msg = f"Failed to store dataset item {item.item_id}"
            log.error(msg)
            raise IngestError(msg)

        return new_row

    @classmethod
    async def all(
        cls,
        db: AsyncConnection,
        label: Optional[str] = None,
        split: Optional[Split] = None,
    ) -> list[Self]:
        """Fetch items, optionally filtered, in insertion order."""
        filters = []
        params: dict[str, Any] = {}
        if label:
            filters.append("label = %(label)s")
            params["label"] = label
        if split:
            filters.append("split = %(split)s")
            params["split"] = str(split)

        sql = f"""
            SELECT * FROM dataset_items
            {"WHERE " + " AND ".join(filters) if filters else ""}
            ORDER BY id;
        """
        async with db.cursor(row_factory=class_row(cls)) as cur:
            log.debug(f"Executing query: {sql!r} with params: {params!r}")
            await cur.execute(sql, params)
            return await cur.fetchall()
