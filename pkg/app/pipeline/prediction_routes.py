"""Prediction endpoint over the loaded index."""

from typing import Annotated, Optional

from fastapi import APIRouter, File, Form, Request, UploadFile
from loguru import logger as log
from pydantic import BaseModel

from app.errors import ImageError
from app.images import load_image
from app.pipeline.pipeline_schemas import ClassificationOutcome, CompletionTrace
from app.pipeline.runner import predict_image

router = APIRouter(
    prefix="/predictions",
    tags=["predictions"],
)


class PredictionOut(BaseModel):
    query_id: Optional[str] = None
    outcome: ClassificationOutcome
    trace: CompletionTrace
    prompt_samples: list[str]


@router.post("", response_model=PredictionOut)
async def create_prediction(
    request: Request,
    image: Annotated[UploadFile, File(description="advertisement image, PNG or JPEG")],
    query_id: Annotated[Optional[str], Form()] = None,
):
    """Classify an uploaded advertisement and extract its product features."""
    state = request.state
    decoded = load_image(await image.read(), error_cls=ImageError)
    log.debug(f"Prediction request {query_id}: {decoded.width}x{decoded.height}")
    outcome, trace, prompt = await predict_image(
        decoded, query_id, state.store, state.dataset, state.clients, state.config
    )
    return PredictionOut(
        query_id=query_id,
        outcome=outcome,
        trace=trace,
        prompt_samples=[sample.item_id for sample in prompt.samples],
    )
