"""Image decode/encode helpers shared by preprocessing, embedding and prompts."""

import base64
import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.errors import VisualRagError

WHITE = 255


def load_image(source: Path | bytes, error_cls: type[VisualRagError] = VisualRagError) -> Image.Image:
    """Decode a PNG/JPEG file or byte string into an RGB image."""
    try:
        if isinstance(source, (bytes, bytearray)):
            image = Image.open(io.BytesIO(source))
        else:
            image = Image.open(source)
        image.load()
    except (OSError, UnidentifiedImageError, ValueError) as e:
        raise error_cls(f"cannot decode image: {e}") from e
    if image.width == 0 or image.height == 0:
        raise error_cls("image is empty")
    return image.convert("RGB")


def to_pixels(image: Image.Image) -> np.ndarray:
    """H x W x 3 uint8 array."""
    return np.asarray(image.convert("RGB"), dtype=np.uint8)


def from_pixels(pixels: np.ndarray) -> Image.Image:
    return Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8))


def encode_png(image: Image.Image) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def to_base64(image: Image.Image) -> str:
    return base64.b64encode(encode_png(image)).decode("ascii")
