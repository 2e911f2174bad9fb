"""Exact cosine vector store with class-label metadata."""

from app.vstore.vector_store import (
    RetrievalHit,
    StoredEmbedding,
    VectorStore,
    filter_by_label,
)

__all__ = ["RetrievalHit", "StoredEmbedding", "VectorStore", "filter_by_label"]
