"""Pixel operations on a product mask; pixels removed by a mask become white."""

import numpy as np
from PIL import Image

from app.errors import EmptyMask, SegmentationError
from app.images import WHITE, from_pixels, to_pixels
from app.preprocess.segmenters import SegmentationMask


def _checked_pixels(image: Image.Image, mask: SegmentationMask) -> np.ndarray:
    if image.size != (mask.width, mask.height):
        raise SegmentationError(
            f"mask is {mask.width}x{mask.height}, image is {image.width}x{image.height}"
        )
    return to_pixels(image).copy()


def crop_product(image: Image.Image, mask: SegmentationMask) -> Image.Image:
    """Clip to the mask's tight bounding box, pixels outside the mask filled."""
    pixels = _checked_pixels(image, mask)
    box = mask.bbox()
    if box is None:
        raise EmptyMask("cannot crop with an empty mask")
    pixels[~mask.bitmap] = WHITE
    top, left, bottom, right = box
    return from_pixels(pixels[top:bottom, left:right])


def demask(image: Image.Image, mask: SegmentationMask) -> Image.Image:
    """Same-size image with the mask region filled, leaving the printed text."""
    pixels = _checked_pixels(image, mask)
    pixels[mask.bitmap] = WHITE
    return from_pixels(pixels)
