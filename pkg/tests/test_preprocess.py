import json

import httpx
import numpy as np
import pytest
from PIL import Image

from app.errors import EmptyMask, SegmentationError
from app.images import to_pixels
from app.pipeline.vlm_clients import MockScript, MockVlmClient
from app.preprocess import (
    EXTRACTION_SYSTEM_MESSAGE,
    EXTRACTION_TASK,
    RemoteSegmenter,
    SegmentationMask,
    StubSegmenter,
    crop_product,
    decode_rle,
    demask,
    encode_rle,
    preprocess_image,
    segment,
)


def advertisement() -> Image.Image:
    """Blue product block on a red background."""
    image = Image.new("RGB", (20, 10), (255, 0, 0))
    image.paste((0, 0, 255), (5, 2, 15, 8))
    return image


def block_mask(width=20, height=10, box=(2, 5, 8, 15)) -> SegmentationMask:
    top, left, bottom, right = box
    bitmap = np.zeros((height, width), dtype=bool)
    bitmap[top:bottom, left:right] = True
    return SegmentationMask(width, height, bitmap, "product.")


class FixedSegmenter:
    def __init__(self, mask):
        self.mask = mask

    async def segment(self, image, prompt):
        return self.mask

    async def aclose(self):
        return None


def test_crop_product_is_tight_and_whitens_outside():
    bitmap = np.zeros((10, 20), dtype=bool)
    bitmap[2:8, 5:15] = True
    bitmap[2, 5] = False
    mask = SegmentationMask(20, 10, bitmap, "product.")
    crop = crop_product(advertisement(), mask)
    assert crop.size == (10, 6)
    pixels = to_pixels(crop)
    assert tuple(pixels[0, 0]) == (255, 255, 255)
    assert tuple(pixels[3, 3]) == (0, 0, 255)


def test_demask_keeps_size_and_removes_product():
    result = demask(advertisement(), block_mask())
    assert result.size == (20, 10)
    pixels = to_pixels(result)
    assert tuple(pixels[4, 10]) == (255, 255, 255)
    assert tuple(pixels[0, 0]) == (255, 0, 0)


def test_empty_mask_cannot_crop():
    empty = SegmentationMask(20, 10, np.zeros((10, 20), dtype=bool), "product.")
    assert empty.is_empty
    assert empty.bbox() is None
    with pytest.raises(EmptyMask):
        crop_product(advertisement(), empty)


def test_full_mask_crop_is_the_original_image():
    image = advertisement()
    full = SegmentationMask(20, 10, np.ones((10, 20), dtype=bool), "product.")
    assert np.array_equal(to_pixels(crop_product(image, full)), to_pixels(image))
    assert (to_pixels(demask(image, full)) == 255).all()


def test_demask_with_empty_mask_is_unchanged():
    image = advertisement()
    empty = SegmentationMask(20, 10, np.zeros((10, 20), dtype=bool), "product.")
    assert np.array_equal(to_pixels(demask(image, empty)), to_pixels(image))


def test_crop_and_demask_partition_the_pixels():
    rng = np.random.default_rng(3)
    source = rng.integers(0, 255, size=(24, 32, 3), dtype=np.uint8)
    image = Image.fromarray(source)
    for _ in range(10):
        bitmap = rng.random((24, 32)) < 0.3
        if not bitmap.any():
            continue
        mask = SegmentationMask(32, 24, bitmap, "product.")
        top, left, bottom, right = mask.bbox()
        crop = to_pixels(crop_product(image, mask))
        rest = to_pixels(demask(image, mask))
        inside = bitmap[top:bottom, left:right]
        window = source[top:bottom, left:right]
        # Masked pixels survive in the crop only, the others in the demasked image only
        assert np.array_equal(crop[inside], window[inside])
        assert (crop[~inside] == 255).all()
        assert np.array_equal(rest[~bitmap], source[~bitmap])
        assert (rest[bitmap] == 255).all()


def test_mask_size_must_match_image():
    with pytest.raises(SegmentationError):
        crop_product(advertisement(), block_mask(width=21))
    with pytest.raises(SegmentationError):
        SegmentationMask(3, 3, np.zeros((2, 3), dtype=bool), "product.")


def test_rle_round_trip_and_validation():
    bitmap = block_mask().bitmap
    assert np.array_equal(decode_rle(encode_rle(bitmap), 20, 10), bitmap)
    assert encode_rle(np.ones((1, 3), dtype=bool)) == "0 3"
    with pytest.raises(SegmentationError):
        decode_rle("1 2", 20, 10)
    with pytest.raises(SegmentationError):
        decode_rle("a b", 2, 1)


@pytest.mark.anyio
async def test_stub_segmenter_covers_the_centre():
    mask = await segment(advertisement(), StubSegmenter(), "product.")
    assert (mask.width, mask.height) == (20, 10)
    assert mask.bbox() == (2, 4, 8, 16)


@pytest.mark.anyio
async def test_remote_segmenter_wire_contract():
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(json.loads(request.content))
        return httpx.Response(
            200, json={"mask_rle": encode_rle(block_mask().bitmap), "width": 20, "height": 10}
        )

    segmenter = RemoteSegmenter("http://seg.test", transport=httpx.MockTransport(handler))
    mask = await segment(advertisement(), segmenter, "product.")
    await segmenter.aclose()
    assert seen[0]["prompt"] == "product."
    assert isinstance(seen[0]["image"], str)
    assert np.array_equal(mask.bitmap, block_mask().bitmap)


@pytest.mark.anyio
async def test_segment_rejects_mismatched_mask():
    with pytest.raises(SegmentationError):
        await segment(advertisement(), FixedSegmenter(block_mask(width=30)), "product.")


@pytest.mark.anyio
async def test_preprocess_extracts_description_with_fixed_prompt():
    vlm = MockVlmClient(MockScript(descriptions={"ad-1": "Saltletts Sticks"}))
    result = await preprocess_image(
        advertisement(), FixedSegmenter(block_mask()), vlm_client=vlm, ref="ad-1"
    )
    assert result.description_text == "Saltletts Sticks"
    assert result.extraction_error is None
    assert result.product_crop.size == (10, 6)
    assert vlm.extraction_requests == [(EXTRACTION_SYSTEM_MESSAGE, EXTRACTION_TASK, "ad-1")]
    assert EXTRACTION_SYSTEM_MESSAGE == "You are an AI assistant that extract text from an image"


@pytest.mark.anyio
async def test_preprocess_records_extraction_failure():
    vlm = MockVlmClient(MockScript(fail_extraction=True))
    result = await preprocess_image(
        advertisement(), FixedSegmenter(block_mask()), vlm_client=vlm, ref="ad-1"
    )
    assert result.description_text == ""
    assert "extraction failed" in result.extraction_error


@pytest.mark.anyio
async def test_preprocess_with_empty_mask_uses_whole_image():
    empty = SegmentationMask(20, 10, np.zeros((10, 20), dtype=bool), "product.")
    vlm = MockVlmClient(MockScript(default_description="text"))
    image = advertisement()
    result = await preprocess_image(image, FixedSegmenter(empty), vlm_client=vlm)
    assert result.empty_mask
    assert result.product_crop is image
    assert result.description_text == ""
    assert vlm.extraction_requests == []
