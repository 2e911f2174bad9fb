"""Turn an advertisement image into a product crop and a description text."""

from dataclasses import dataclass
from typing import Optional

from PIL import Image

from app.errors import ExtractionError
from app.preprocess.extraction import TextExtractor, extract_description
from app.preprocess.masking import crop_product, demask
from app.preprocess.segmenters import SegmentationMask, Segmenter, segment


@dataclass(frozen=True)
class PreprocessResult:
    """Outputs of preprocessing one image.

    ``description_text`` is empty only when extraction failed or was
    skipped, and ``extraction_error`` says why.
    """

    product_crop: Image.Image
    demasked_image: Image.Image
    description_text: str
    mask: SegmentationMask
    extraction_error: Optional[str] = None

    @property
    def empty_mask(self) -> bool:
        return self.mask.is_empty


async def preprocess_image(
    image: Image.Image,
    segmenter: Segmenter,
    prompt: str = "product.",
    vlm_client: Optional[TextExtractor] = None,
    ref: Optional[str] = None,
) -> PreprocessResult:
    """Segment, crop and demask; extract the description when a client is given.

    On an empty mask the whole image is the product crop and extraction is
    skipped.
    """
    mask = await segment(image, segmenter, prompt)
    if mask.is_empty:
        return PreprocessResult(
            product_crop=image,
            demasked_image=image,
            description_text="",
            mask=mask,
            extraction_error="skipped: empty mask",
        )

    product_crop = crop_product(image, mask)
    demasked_image = demask(image, mask)
    description, error = "", None
    if vlm_client is not None:
        try:
            description = await extract_description(demasked_image, vlm_client, ref=ref)
        except ExtractionError as e:
            error = str(e)
    return PreprocessResult(product_crop, demasked_image, description, mask, error)
