"""Unit-normalized image and text embeddings behind one interface."""

from app.embed.embedders import (
    Embedder,
    EmbeddingVector,
    ReferenceEmbedder,
    RemoteEmbedder,
    cosine_distance,
    get_embedder,
)

__all__ = [
    "Embedder",
    "EmbeddingVector",
    "ReferenceEmbedder",
    "RemoteEmbedder",
    "cosine_distance",
    "get_embedder",
]
