"""Segmentation, cropping, demasking and description extraction."""

from app.preprocess.extraction import (
    EXTRACTION_SYSTEM_MESSAGE,
    EXTRACTION_TASK,
    TextExtractor,
    extract_description,
)
from app.preprocess.masking import crop_product, demask
from app.preprocess.preprocess import PreprocessResult, preprocess_image
from app.preprocess.segmenters import (
    RemoteSegmenter,
    SegmentationMask,
    Segmenter,
    StubSegmenter,
    decode_rle,
    encode_rle,
    get_segmenter,
    segment,
)

__all__ = [
    "EXTRACTION_SYSTEM_MESSAGE",
    "EXTRACTION_TASK",
    "PreprocessResult",
    "RemoteSegmenter",
    "SegmentationMask",
    "Segmenter",
    "StubSegmenter",
    "TextExtractor",
    "crop_product",
    "decode_rle",
    "demask",
    "encode_rle",
    "extract_description",
    "get_segmenter",
    "preprocess_image",
    "segment",
]
