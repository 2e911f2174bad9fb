"""Brute-force cosine vector store.

Image and text embeddings share one store and compete in the same top-k.
Equal distances are ordered by ascending store_id, so retrieval is fully
deterministic.
"""

import os
import struct
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from loguru import logger as log
from pydantic import BaseModel, ConfigDict

from app.db.enums import Modality
from app.embed import EmbeddingVector
from app.errors import DimensionError, EmptyStore, SnapshotError

SNAPSHOT_MAGIC = b"VRAGSTOR"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<8sHIQ")
_RECORD_ID = struct.Struct("<Q")
_STR_LEN = struct.Struct("<H")
_MODALITY = struct.Struct("<B")
_MODALITY_CODES = {Modality.IMAGE: 0, Modality.TEXT: 1}
_CODE_MODALITIES = {code: modality for modality, code in _MODALITY_CODES.items()}


@dataclass(frozen=True)
class StoredEmbedding:
    """A vector-store row; store_id is assigned by the store on add."""

    vector: EmbeddingVector
    label: str
    item_id: str
    store_id: Optional[int] = None

    def __post_init__(self):
        if not self.label or not self.item_id:
            raise ValueError("stored embeddings need a label and an item_id")

    @property
    def modality(self) -> Modality:
        return self.vector.modality


class RetrievalHit(BaseModel):
    """One search result."""

    model_config = ConfigDict(frozen=True)

    store_id: int
    label: str
    item_id: str
    modality: Modality
    distance: float


def filter_by_label(hits: Iterable[RetrievalHit], label: str) -> list[RetrievalHit]:
    """Hits carrying ``label``, order preserved."""
    return [hit for hit in hits if hit.label == label]


class VectorStore:
    """Rows live in a growable float32 matrix plus parallel metadata lists.

    Writers are serialized by a lock; a search works on the rows that existed
    when it started, so an add is visible to every later search.
    """

    def __init__(self, dimension: Optional[int] = None):
        self.dimension = dimension
        self._lock = threading.Lock()
        self._matrix = np.zeros((0, dimension or 0), dtype=np.float32)
        self._size = 0
        self._store_ids: list[int] = []
        self._used_ids: set[int] = set()
        self._labels: list[str] = []
        self._item_ids: list[str] = []
        self._modalities: list[Modality] = []
        self._next_id = 0

    def __len__(self) -> int:
        return self._size

    @property
    def count(self) -> int:
        return self._size

    def add(self, embedding: StoredEmbedding) -> int:
        """Insert one row and return its store_id; the first insert fixes D."""
        vector = embedding.vector
        with self._lock:
            if self.dimension is None:
                self.dimension = vector.dimension
            if vector.dimension != self.dimension:
                raise DimensionError(
                    f"store holds D={self.dimension}, got a D={vector.dimension} vector"
                )

            store_id = embedding.store_id
            if store_id is None:
                store_id = self._next_id
            elif store_id in self._used_ids:
                raise ValueError(f"store_id {store_id} already used")
            self._next_id = max(self._next_id, store_id + 1)

            if self._size == self._matrix.shape[0]:
                grown = np.zeros((max(16, 2 * self._size), self.dimension), dtype=np.float32)
                if self._size:
                    grown[: self._size] = self._matrix[: self._size]
                self._matrix = grown
            self._matrix[self._size] = vector.values
            self._store_ids.append(store_id)
            self._used_ids.add(store_id)
            self._labels.append(embedding.label)
            self._item_ids.append(embedding.item_id)
            self._modalities.append(vector.modality)
            # Publish the row last
            self._size += 1
        return store_id

    def _view(self):
        size = self._size
        return (
            self._matrix[:size],
            self._store_ids[:size],
            self._labels[:size],
            self._item_ids[:size],
            self._modalities[:size],
        )

    def records(self) -> list[StoredEmbedding]:
        """All rows in insertion order, vectors as stored."""
        matrix, store_ids, labels, item_ids, modalities = self._view()
        return [
            StoredEmbedding(
                vector=EmbeddingVector(matrix[i], modalities[i]),
                label=labels[i],
                item_id=item_ids[i],
                store_id=store_ids[i],
            )
            for i in range(len(store_ids))
        ]

    def counts_by_modality(self) -> dict[str, int]:
        counts = {str(modality): 0 for modality in Modality}
        for modality in self._modalities[: self._size]:
            counts[str(modality)] += 1
        return counts

    def search_topk(self, query: EmbeddingVector, k: int) -> list[RetrievalHit]:
        """Exact top-k by cosine distance, ties by ascending store_id."""
        if k < 1:
            raise ValueError("k must be positive")
        matrix, store_ids, labels, item_ids, modalities = self._view()
        if not store_ids:
            raise EmptyStore("vector store is empty")
        if query.dimension != self.dimension:
            raise DimensionError(
                f"store holds D={self.dimension}, got a D={query.dimension} query"
            )

        q = query.values
        dots = np.einsum("ij,j->i", matrix, q, dtype=np.float64)
        norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix, dtype=np.float64))
        norms *= float(np.linalg.norm(q))
        distances = np.clip(1.0 - dots / norms, 0.0, 2.0)

        order = np.lexsort((np.asarray(store_ids), distances))[:k]
        return [
            RetrievalHit(
                store_id=store_ids[i],
                label=labels[i],
                item_id=item_ids[i],
                modality=modalities[i],
                distance=float(distances[i]),
            )
            for i in order
        ]

    def snapshot(self, path: Path) -> Path:
        """Write the store; vectors as little-endian float32 for bit-exact restore."""
        path = Path(path)
        matrix, store_ids, labels, item_ids, modalities = self._view()
        chunks = [
            _HEADER.pack(
                SNAPSHOT_MAGIC, SNAPSHOT_VERSION, self.dimension or 0, len(store_ids)
            )
        ]
        for i, store_id in enumerate(store_ids):
            chunks.append(_RECORD_ID.pack(store_id))
            for text in (labels[i], item_ids[i]):
                encoded = text.encode("utf-8")
                chunks.append(_STR_LEN.pack(len(encoded)))
                chunks.append(encoded)
            chunks.append(_MODALITY.pack(_MODALITY_CODES[modalities[i]]))
            chunks.append(np.asarray(matrix[i], dtype="<f4").tobytes())

        path.parent.mkdir(parents=True, exist_ok=True)
        tmp_path = path.with_name(path.name + ".tmp")
        tmp_path.write_bytes(b"".join(chunks))
        os.replace(tmp_path, path)
        log.info(f"Wrote snapshot of {len(store_ids)} embeddings to {path}")
        return path

    @classmethod
    def restore(cls, path: Path) -> "VectorStore":
        """Read a snapshot back, store_ids included."""
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise SnapshotError(f"cannot read snapshot {path}: {e}") from e
        reader = _Reader(data)

        magic, version, dimension, count = reader.unpack(_HEADER)
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotError(f"{path} is not a vector store snapshot")
        if version != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version {version}")
        if count and not dimension:
            raise SnapshotError("snapshot has records but no dimension")

        store = cls(dimension or None)
        for _ in range(count):
            (store_id,) = reader.unpack(_RECORD_ID)
            label = reader.text()
            item_id = reader.text()
            (code,) = reader.unpack(_MODALITY)
            if code not in _CODE_MODALITIES:
                raise SnapshotError(f"unknown modality code {code}")
            values = np.frombuffer(reader.take(4 * dimension), dtype="<f4")
            try:
                store.add(
                    StoredEmbedding(
                        vector=EmbeddingVector(values, _CODE_MODALITIES[code]),
                        label=label,
                        item_id=item_id,
                        store_id=store_id,
                    )
                )
            except ValueError as e:
                raise SnapshotError(f"corrupt record {store_id}: {e}") from e
        if reader.remaining:
            raise SnapshotError(f"{reader.remaining} trailing bytes in snapshot")
        log.info(f"Restored {count} embeddings (D={dimension}) from {path}")
        return store


class _Reader:
    """Bounds-checked cursor over snapshot bytes."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, n: int) -> bytes:
        if n > self.remaining:
            raise SnapshotError("snapshot is truncated")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def text(self) -> str:
        (length,) = self.unpack(_STR_LEN)
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as e:
            raise SnapshotError("snapshot holds invalid text") from e
