"""Product description extraction from the demasked advertisement."""

from typing import Protocol

from loguru import logger as log
from PIL import Image

from app.errors import ExtractionError, VisualRagError

EXTRACTION_SYSTEM_MESSAGE = "You are an AI assistant that extract text from an image"
EXTRACTION_TASK = (
    "First, extract the text. Second, remove all price information. "
    "If available, remove all special / detailed description of the product"
)


class TextExtractor(Protocol):
    async def extract_text(
        self, system: str, task: str, image: Image.Image, ref: str | None = None
    ) -> str: ...


async def extract_description(
    demasked_image: Image.Image, vlm_client: TextExtractor, ref: str | None = None
) -> str:
    """Send the fixed extraction prompt and return the model's text."""
    try:
        text = await vlm_client.extract_text(
            EXTRACTION_SYSTEM_MESSAGE, EXTRACTION_TASK, demasked_image, ref=ref
        )
    except (VisualRagError, TimeoutError, OSError) as e:
        log.warning(f"Description extraction failed for {ref}: {e}")
        raise ExtractionError(f"description extraction failed: {e}") from e
    if not isinstance(text, str):
        raise ExtractionError(f"extraction returned {type(text).__name__}, not text")
    return text.strip()
