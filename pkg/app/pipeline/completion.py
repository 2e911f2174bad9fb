"""Structured completion with one reduced-context retry."""

import time
from typing import Any, Optional

from loguru import logger as log

from app.domain import Prediction, parse_prediction, prediction_json_schema
from app.errors import CompletionError, SchemaError, VisualRagError
from app.pipeline.pipeline_schemas import Attempt, CompletionTrace, PromptDocument
from app.pipeline.vlm_clients import VlmClient, VlmResponse


async def _request(
    vlm_client: VlmClient, prompt: PromptDocument, schema: dict[str, Any]
) -> VlmResponse:
    try:
        return await vlm_client.complete(prompt, schema)
    except VisualRagError:
        raise
    except Exception as e:
        raise CompletionError(f"completion request failed: {e!r}") from e


async def complete(
    prompt: PromptDocument,
    vlm_client: VlmClient,
    schema: Optional[dict[str, Any]] = None,
) -> CompletionTrace:
    """Ask for a Prediction; an all-null answer to a multi-sample prompt is
    retried once with only the first sample.

    Unparseable answers count as all-null. Tokens and time are summed over
    attempts.
    """
    schema = schema if schema is not None else prediction_json_schema()
    attempts: list[Attempt] = []
    current = prompt
    while True:
        started = time.perf_counter()
        response = await _request(vlm_client, current, schema)
        elapsed = time.perf_counter() - started

        schema_error = None
        try:
            prediction = parse_prediction(response.payload)
        except SchemaError as e:
            log.warning(f"{current.query_id}: unparseable response: {e}")
            prediction, schema_error = Prediction(), e.message
        attempts.append(
            Attempt(
                n_samples=current.n_samples,
                all_null=prediction.is_all_null,
                input_tokens=response.input_tokens,
                output_tokens=response.output_tokens,
                elapsed=elapsed,
                schema_error=schema_error,
            )
        )
        if prediction.is_all_null and current.n_samples > 1 and len(attempts) == 1:
            log.info(f"{current.query_id}: all-null answer, retrying with one sample")
            current = current.truncated(1)
            continue
        break

    return CompletionTrace(
        prediction=prediction,
        input_tokens=sum(a.input_tokens for a in attempts),
        output_tokens=sum(a.output_tokens for a in attempts),
        elapsed=sum(a.elapsed for a in attempts),
        attempts=attempts,
    )
