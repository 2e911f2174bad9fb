"""Segmentation clients.

The remote client speaks JSON: request ``{"image": base64 PNG, "prompt": str}``,
response ``{"mask_rle": str, "width": int, "height": int}``. The mask RLE is
a space separated list of run lengths over the row-major bitmap, starting
with a run of False.
"""

from dataclasses import dataclass
from typing import Optional, Protocol

import httpx
import numpy as np
from loguru import logger as log
from PIL import Image

from app.config import SegmenterConfig, Settings, settings
from app.db.enums import SegmenterKind
from app.errors import SegmentationError
from app.http_client import ServiceClient
from app.images import to_base64

STUB_COVERAGE = 0.6


@dataclass(frozen=True)
class SegmentationMask:
    """Per-pixel product mask; an all-False mask is a valid, reportable result."""

    width: int
    height: int
    bitmap: np.ndarray
    prompt: str

    def __post_init__(self):
        bitmap = np.asarray(self.bitmap, dtype=bool)
        if bitmap.shape != (self.height, self.width):
            raise SegmentationError(
                f"mask bitmap is {bitmap.shape}, expected {(self.height, self.width)}"
            )
        bitmap.setflags(write=False)
        object.__setattr__(self, "bitmap", bitmap)

    @property
    def is_empty(self) -> bool:
        return not bool(self.bitmap.any())

    def bbox(self) -> Optional[tuple[int, int, int, int]]:
        """(top, left, bottom, right), exclusive bottom/right; None when empty."""
        if self.is_empty:
            return None
        rows = np.flatnonzero(self.bitmap.any(axis=1))
        cols = np.flatnonzero(self.bitmap.any(axis=0))
        return int(rows[0]), int(cols[0]), int(rows[-1]) + 1, int(cols[-1]) + 1


def encode_rle(bitmap: np.ndarray) -> str:
    flat = np.asarray(bitmap, dtype=bool).ravel()
    if flat.size == 0:
        return "0"
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    runs = np.diff(np.concatenate(([0], changes, [flat.size]))).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return " ".join(map(str, runs))


def decode_rle(rle: str, width: int, height: int) -> np.ndarray:
    try:
        runs = [int(run) for run in rle.split()]
    except ValueError as e:
        raise SegmentationError(f"invalid mask RLE: {e}") from e
    if any(run < 0 for run in runs) or sum(runs) != width * height:
        raise SegmentationError(
            f"mask RLE covers {sum(runs)} pixels, expected {width * height}"
        )
    values = np.arange(len(runs)) % 2 == 1
    return np.repeat(values, runs).reshape(height, width)


class Segmenter(Protocol):
    async def segment(self, image: Image.Image, prompt: str) -> SegmentationMask: ...

    async def aclose(self) -> None: ...


class StubSegmenter:
    """Centered rectangle covering 60% of each dimension."""

    async def segment(self, image: Image.Image, prompt: str) -> SegmentationMask:
        width, height = image.size
        box_w = max(1, round(width * STUB_COVERAGE))
        box_h = max(1, round(height * STUB_COVERAGE))
        left = (width - box_w) // 2
        top = (height - box_h) // 2
        bitmap = np.zeros((height, width), dtype=bool)
        bitmap[top : top + box_h, left : left + box_w] = True
        return SegmentationMask(width, height, bitmap, prompt)

    async def aclose(self) -> None:
        return None


class RemoteSegmenter:
    """Client of a text-prompted segmentation service."""

    def __init__(
        self,
        url: str,
        *,
        token=None,
        timeout: float = 60.0,
        retries: int = 3,
        max_in_flight: int = 4,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        retry_delay: float = 0.5,
    ):
        self._client = ServiceClient(
            url,
            token=token,
            timeout=timeout,
            retries=retries,
            retry_delay=retry_delay,
            max_in_flight=max_in_flight,
            error_cls=SegmentationError,
            transport=transport,
        )

    async def segment(self, image: Image.Image, prompt: str) -> SegmentationMask:
        body = await self._client.post_json({"image": to_base64(image), "prompt": prompt})
        try:
            width, height = int(body["width"]), int(body["height"])
            rle = str(body["mask_rle"])
        except (KeyError, TypeError, ValueError) as e:
            raise SegmentationError(f"malformed segmentation response: {e!r}") from e
        return SegmentationMask(width, height, decode_rle(rle, width, height), prompt)

    async def aclose(self) -> None:
        await self._client.aclose()


async def segment(image: Image.Image, segmenter: Segmenter, prompt: str) -> SegmentationMask:
    """Ask the segmenter for a product mask and check it fits the image."""
    try:
        mask = await segmenter.segment(image, prompt)
    except SegmentationError:
        raise
    except Exception as e:
        raise SegmentationError(f"segmentation failed: {e!r}") from e
    if (mask.width, mask.height) != image.size:
        raise SegmentationError(
            f"mask is {mask.width}x{mask.height}, image is {image.width}x{image.height}"
        )
    if mask.is_empty:
        log.warning(f"Segmentation for prompt {prompt!r} returned an empty mask")
    return mask


def get_segmenter(config: SegmenterConfig, env: Settings = settings) -> Segmenter:
    if config.kind == SegmenterKind.REMOTE:
        return RemoteSegmenter(
            config.url,
            token=env.SEGMENTER_API_TOKEN,
            timeout=config.timeout,
            retries=config.retries,
            max_in_flight=config.max_in_flight,
        )
    return StubSegmenter()
