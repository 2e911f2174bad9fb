"""Embedders: a deterministic reference one for offline runs, and a remote client.

Image and text vectors of one embedder share the same dimension so both
modalities can live in one vector store.
"""

import zlib
from dataclasses import dataclass
from typing import Optional, Protocol

import httpx
import numpy as np
from PIL import Image

from app.config import EmbedderConfig, Settings, settings
from app.db.enums import EmbedderKind, Modality
from app.errors import ConfigError, DimensionError, EmbedError
from app.http_client import ServiceClient
from app.images import load_image, to_base64, to_pixels

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EmbeddingVector:
    """A unit-length embedding; ``values`` is a read-only float64 array."""

    values: np.ndarray
    modality: Modality

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise EmbedError("embedding must be a non-empty 1-D vector")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def normalized(cls, values, modality: Modality) -> "EmbeddingVector":
        """L2-normalize raw values."""
        values = np.asarray(values, dtype=np.float64)
        norm = float(np.linalg.norm(values))
        if not np.isfinite(norm) or norm == 0.0:
            raise EmbedError("cannot normalize a zero or non-finite vector")
        return cls(values / norm, Modality(modality))

    @property
    def dimension(self) -> int:
        return int(self.values.shape[0])


def cosine_distance(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """1 - cos(a, b), in [0, 2]."""
    if a.dimension != b.dimension:
        raise DimensionError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    norms = float(np.linalg.norm(a.values) * np.linalg.norm(b.values))
    if norms == 0.0:
        raise EmbedError("cosine distance of a zero vector")
    similarity = float(np.dot(a.values, b.values)) / norms
    return min(2.0, max(0.0, 1.0 - similarity))


def normalize_text(text: str) -> str:
    """Trim and collapse whitespace; identical after this means identical vectors."""
    return " ".join(text.split())


class Embedder(Protocol):
    dimension: int

    async def embed_image(self, image: Image.Image | bytes) -> EmbeddingVector: ...

    async def embed_text(self, text: str) -> EmbeddingVector: ...

    async def aclose(self) -> None: ...


def _checked_text(text: str) -> str:
    if not isinstance(text, str):
        raise EmbedError(f"text must be a string, got {type(text).__name__}")
    cleaned = normalize_text(text)
    if not cleaned:
        raise EmbedError("cannot embed empty text")
    return cleaned


def _checked_image(image: Image.Image | bytes) -> Image.Image:
    if isinstance(image, (bytes, bytearray)):
        return load_image(image, error_cls=EmbedError)
    if not isinstance(image, Image.Image):
        raise EmbedError(f"expected an image, got {type(image).__name__}")
    if image.width == 0 or image.height == 0:
        raise EmbedError("image is empty")
    return image


class ReferenceEmbedder:
    """Model-free embedder for tests and offline runs.

    Images: per-channel 8-bin intensity histograms plus a 2x2 grid of
    per-channel means. Texts: character trigrams hashed into D buckets.
    """

    HISTOGRAM_BINS = 8
    GRID = 2
    IMAGE_FEATURES = 3 * HISTOGRAM_BINS + 3 * GRID * GRID

    def __init__(self, dimension: int = 64):
        if dimension < self.IMAGE_FEATURES:
            raise ConfigError(
                f"reference embedder needs dimension >= {self.IMAGE_FEATURES}"
            )
        self.dimension = dimension

    def image_vector(self, image: Image.Image | bytes) -> EmbeddingVector:
        pixels = to_pixels(_checked_image(image)).astype(np.float64)
        n_pixels = pixels.shape[0] * pixels.shape[1]
        features = np.zeros(self.dimension)

        for channel in range(3):
            counts, _ = np.histogram(
                pixels[..., channel], bins=self.HISTOGRAM_BINS, range=(0, 256)
            )
            start = channel * self.HISTOGRAM_BINS
            features[start : start + self.HISTOGRAM_BINS] = counts / n_pixels

        overall = pixels.reshape(-1, 3).mean(axis=0) / 255.0
        offset = 3 * self.HISTOGRAM_BINS
        for rows in np.array_split(pixels, self.GRID, axis=0):
            for cell in np.array_split(rows, self.GRID, axis=1):
                # Images thinner than the grid reuse the overall mean
                mean = cell.reshape(-1, 3).mean(axis=0) / 255.0 if cell.size else overall
                features[offset : offset + 3] = mean
                offset += 3

        return EmbeddingVector.normalized(features, Modality.IMAGE)

    def text_vector(self, text: str) -> EmbeddingVector:
        padded = f" {_checked_text(text).lower()} "
        features = np.zeros(self.dimension)
        for i in range(len(padded) - 2):
            bucket = zlib.crc32(padded[i : i + 3].encode("utf-8")) % self.dimension
            features[bucket] += 1.0
        return EmbeddingVector.normalized(features, Modality.TEXT)

    async def embed_image(self, image: Image.Image | bytes) -> EmbeddingVector:
        return self.image_vector(image)

    async def embed_text(self, text: str) -> EmbeddingVector:
        return self.text_vector(text)

    async def aclose(self) -> None:
        return None


class RemoteEmbedder:
    """Embedding service client.

    Request: ``{"modality": "image"|"text", "payload": base64 PNG | text}``;
    response: ``{"values": [...]}``.
    """

    def __init__(
        self,
        url: str,
        dimension: int,
        *,
        token=None,
        timeout: float = 30.0,
        retries: int = 3,
        max_in_flight: int = 4,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        retry_delay: float = 0.5,
    ):
        self.dimension = dimension
        self._client = ServiceClient(
            url,
            token=token,
            timeout=timeout,
            retries=retries,
            retry_delay=retry_delay,
            max_in_flight=max_in_flight,
            error_cls=EmbedError,
            transport=transport,
        )

    async def _embed(self, modality: Modality, payload: str) -> EmbeddingVector:
        body = await self._client.post_json({"modality": str(modality), "payload": payload})
        values = body.get("values")
        if not isinstance(values, list) or not values:
            raise EmbedError("embedding response has no values")
        if len(values) != self.dimension:
            raise DimensionError(
                f"embedder returned {len(values)} values, expected {self.dimension}"
            )
        try:
            return EmbeddingVector.normalized(values, modality)
        except (TypeError, ValueError) as e:
            raise EmbedError(f"embedding values are not numbers: {e}") from e

    async def embed_image(self, image: Image.Image | bytes) -> EmbeddingVector:
        return await self._embed(Modality.IMAGE, to_base64(_checked_image(image)))

    async def embed_text(self, text: str) -> EmbeddingVector:
        return await self._embed(Modality.TEXT, _checked_text(text))

    async def aclose(self) -> None:
        await self._client.aclose()


def get_embedder(config: EmbedderConfig, env: Settings = settings) -> Embedder:
    """Build the embedder a run config names."""
    if config.kind == EmbedderKind.REMOTE:
        return RemoteEmbedder(
            config.url,
            config.dimension,
            token=env.EMBEDDER_API_TOKEN,
            timeout=config.timeout,
            retries=config.retries,
            max_in_flight=config.max_in_flight,
        )
    return ReferenceEmbedder(config.dimension)
