"""In-memory relational store of the dataset.

Ingest is exclusive; once loaded the store is only read, so concurrent
readers need no locking.
"""

import json
import threading
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional, Sequence

from loguru import logger as log
from pydantic import ValidationError

from app.dataset.dataset_schemas import ClassLabel, DatasetItem, DatasetStats
from app.db.enums import Split
from app.domain import Gtin
from app.errors import DuplicateItem, IngestError, UnknownItem, UnknownLabel


def parse_manifest_line(line: str, line_no: int, base_dir: Path) -> DatasetItem:
    """Parse one JSONL manifest line, image paths relative to the manifest."""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise IngestError(f"invalid JSON: {e.msg}", line_no) from e
    if not isinstance(data, dict):
        raise IngestError("expected a JSON object", line_no)
    try:
        item = DatasetItem.model_validate(data)
    except ValidationError as e:
        errors = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise IngestError(errors, line_no) from e

    image_path = item.image_path
    if not image_path.is_absolute():
        image_path = base_dir / image_path
    if not image_path.is_file():
        raise IngestError(f"image not found: {image_path}", line_no)
    return item.model_copy(update={"image_path": image_path})


class Dataset:
    """Items keyed by id and grouped by class label."""

    def __init__(self, items: Iterable[DatasetItem] = ()):
        self._items: dict[str, DatasetItem] = {}
        self._by_label: dict[str, list[str]] = {}
        self._unions: dict[str, frozenset[Gtin]] = {}
        self._ingest_lock = threading.Lock()
        self.add_items(items)

    @classmethod
    def from_manifest(cls, path: Path) -> "Dataset":
        dataset = cls()
        dataset.ingest_manifest(path)
        return dataset

    def ingest_manifest(self, path: Path) -> DatasetStats:
        """Load a JSONL manifest; all lines are validated before any is stored."""
        path = Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise IngestError(f"cannot read manifest {path}: {e}") from e

        parsed: list[tuple[int, DatasetItem]] = []
        for line_no, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            parsed.append((line_no, parse_manifest_line(line, line_no, path.parent)))

        self._add(parsed)
        stats = self.stats()
        log.info(
            f"Ingested {len(parsed)} items from {path}: "
            f"{stats.n_train} train / {stats.n_test} test, {stats.n_classes} classes"
        )
        return stats

    def add_items(self, items: Iterable[DatasetItem]) -> None:
        self._add([(None, item) for item in items])

    def _add(self, numbered: Sequence[tuple[Optional[int], DatasetItem]]) -> None:
        with self._ingest_lock:
            seen = set(self._items)
            for line_no, item in numbered:
                if item.item_id in seen:
                    raise DuplicateItem(f"duplicate item_id {item.item_id!r}", line_no)
                seen.add(item.item_id)

            touched = set()
            for _, item in numbered:
                self._items[item.item_id] = item
                self._by_label.setdefault(item.label, []).append(item.item_id)
                touched.add(item.label)
            for label in touched:
                self._unions[label] = frozenset(
                    gtin
                    for item_id in self._by_label[label]
                    for gtin in self._items[item_id].product.gtins
                )

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._items

    def get(self, item_id: str) -> DatasetItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise UnknownItem(f"unknown item {item_id!r}") from None

    def items(self, split: Optional[Split] = None) -> list[DatasetItem]:
        """Items in ingest order, optionally of one split."""
        return [
            item for item in self._items.values() if split is None or item.split == split
        ]

    def labels(self) -> list[str]:
        return sorted(self._by_label)

    def _label_ids(self, label: str) -> list[str]:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownLabel(f"unknown label {label!r}") from None

    def relational_query(
        self, label: str, order: Optional[Sequence[str]] = None
    ) -> list[DatasetItem]:
        """Train items of a label.

        Ids listed in ``order`` come first in that order, the remaining train
        items follow in ingest order. Test items are never returned.
        """
        train = [
            self._items[item_id]
            for item_id in self._label_ids(label)
            if self._items[item_id].split == Split.TRAIN
        ]
        if not order:
            return train
        by_id = {item.item_id: item for item in train}
        head = []
        for item_id in dict.fromkeys(order):
            if item_id in by_id:
                head.append(by_id.pop(item_id))
        return head + [item for item in train if item.item_id in by_id]

    def class_gtin_union(self, label: str) -> frozenset[Gtin]:
        """Union of the GTIN lists of every item (train and test) of a label."""
        self._label_ids(label)
        return self._unions[label]

    def class_label(self, label: str) -> ClassLabel:
        return ClassLabel(id=label, gtin_union=self.class_gtin_union(label))

    def stats(self) -> DatasetStats:
        train = Counter(i.label for i in self._items.values() if i.split == Split.TRAIN)
        test = Counter(i.label for i in self._items.values() if i.split == Split.TEST)
        labels = self.labels()
        return DatasetStats(
            n_items=len(self._items),
            n_train=sum(train.values()),
            n_test=sum(test.values()),
            n_classes=len(labels),
            per_class_train={label: train[label] for label in labels},
            per_class_test={label: test[label] for label in labels},
        )
