"""Prompt generation under a token budget."""

import json
from typing import Optional, Sequence

from loguru import logger as log
from PIL import Image

from app.errors import BudgetExceeded, NoContextAvailable
from app.pipeline.pipeline_schemas import (
    ContextSample,
    FewShotSample,
    ImagePart,
    PromptDocument,
    TextPart,
)

DEFAULT_TASK = "Extract all features"
DEFAULT_IMAGE_TOKENS = 25_000


def record_text(sample: FewShotSample, index: int) -> str:
    """Text part following a sample image: its records as the output schema."""
    record = json.dumps(sample.target.to_wire(), ensure_ascii=False)
    return f"Sample {index}, features of the image above:\n{record}"


def to_context_sample(sample: FewShotSample, index: int) -> ContextSample:
    return ContextSample(
        item_id=sample.item_id,
        image=ImagePart(ref=sample.item_id, path=sample.item.image_path),
        record=TextPart(record_text(sample, index)),
        target=sample.target,
    )


def generate_prompt(
    task: str,
    context: Sequence[FewShotSample],
    query_image: Image.Image,
    budget: int,
    image_tokens: int = DEFAULT_IMAGE_TOKENS,
    query_id: Optional[str] = None,
) -> PromptDocument:
    """Build task, samples, query; drop tail samples until the estimate fits.

    Raises BudgetExceeded when a single sample is still over ``budget``.
    """
    if not context:
        raise NoContextAvailable("a prompt needs at least one context sample")
    if budget <= 0:
        raise ValueError("budget must be positive")

    prompt = PromptDocument(
        task=TextPart(task),
        samples=tuple(to_context_sample(s, i) for i, s in enumerate(context, start=1)),
        query=ImagePart(ref=query_id or "query", image=query_image),
        query_id=query_id,
        image_tokens=image_tokens,
    )
    estimate = prompt.estimate_tokens()
    while estimate > budget and prompt.n_samples > 1:
        prompt = prompt.truncated(prompt.n_samples - 1)
        estimate = prompt.estimate_tokens()
    if estimate > budget:
        raise BudgetExceeded(
            f"prompt needs ~{estimate} tokens with one sample, budget is {budget}"
        )
    if prompt.dropped:
        log.debug(f"{query_id}: dropped {prompt.dropped} samples to fit {budget} tokens")
    return prompt
