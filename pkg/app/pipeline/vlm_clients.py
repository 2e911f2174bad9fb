"""Vision-language model clients: a remote structured-output endpoint and a
scripted mock for offline runs.

Wire contract of the remote endpoint:

    request   {"model": ..., "messages": [{"role": ..., "content": [part, ...]}],
               "schema": {...}}
    part      {"type": "text", "text": ...} | {"type": "image", "data": base64 PNG}
    response  {<prediction fields>, "usage": {"input_tokens": n, "output_tokens": n}}

Text extraction uses the same endpoint without a schema and reads
``{"text": ..., "usage": {...}}``.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Protocol

import httpx
from loguru import logger as log
from PIL import Image
from pydantic import BaseModel, Field, ValidationError

from app.config import Settings, VlmConfig, settings
from app.db.enums import VlmKind
from app.domain import PREDICTION_FIELDS
from app.errors import CompletionError, ConfigError
from app.http_client import ServiceClient
from app.images import to_base64
from app.pipeline.pipeline_schemas import ImagePart, PromptDocument, TextPart


@dataclass(frozen=True)
class VlmResponse:
    payload: dict[str, Any] | str
    input_tokens: int = 0
    output_tokens: int = 0


class VlmClient(Protocol):
    async def complete(
        self, prompt: PromptDocument, schema: Optional[dict[str, Any]] = None
    ) -> VlmResponse: ...

    async def extract_text(
        self, system: str, task: str, image: Image.Image, ref: Optional[str] = None
    ) -> str: ...

    async def aclose(self) -> None: ...


def _part_json(part: TextPart | ImagePart) -> dict[str, Any]:
    if isinstance(part, TextPart):
        return {"type": "text", "text": part.text}
    return {"type": "image", "data": to_base64(part.load())}


def prompt_messages(prompt: PromptDocument) -> list[dict[str, Any]]:
    """Group consecutive parts of the same role into messages, order kept."""
    messages: list[dict[str, Any]] = []
    for part in prompt.parts:
        if messages and messages[-1]["role"] == part.role:
            messages[-1]["content"].append(_part_json(part))
        else:
            messages.append({"role": part.role, "content": [_part_json(part)]})
    return messages


def _usage(body: dict[str, Any]) -> tuple[int, int]:
    usage = body.get("usage") or {}
    try:
        return int(usage.get("input_tokens", 0)), int(usage.get("output_tokens", 0))
    except (TypeError, ValueError, AttributeError) as e:
        raise CompletionError(f"malformed usage block: {usage!r}") from e


class RemoteVlmClient:
    """Structured-output VLM endpoint."""

    def __init__(
        self,
        url: str,
        model: Optional[str] = None,
        *,
        token=None,
        timeout: float = 60.0,
        retries: int = 3,
        max_in_flight: int = 4,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        retry_delay: float = 0.5,
    ):
        self.model = model
        self._client = ServiceClient(
            url,
            token=token,
            timeout=timeout,
            retries=retries,
            retry_delay=retry_delay,
            max_in_flight=max_in_flight,
            error_cls=CompletionError,
            transport=transport,
        )

    async def complete(
        self, prompt: PromptDocument, schema: Optional[dict[str, Any]] = None
    ) -> VlmResponse:
        request: dict[str, Any] = {"model": self.model, "messages": prompt_messages(prompt)}
        if schema is not None:
            request["schema"] = schema
        body = await self._client.post_json(request)
        input_tokens, output_tokens = _usage(body)
        payload = body.get("output", {k: v for k, v in body.items() if k != "usage"})
        log.debug(
            f"{prompt.query_id}: {prompt.n_samples} samples, "
            f"{input_tokens} in / {output_tokens} out"
        )
        return VlmResponse(payload, input_tokens, output_tokens)

    async def extract_text(
        self, system: str, task: str, image: Image.Image, ref: Optional[str] = None
    ) -> str:
        request = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": [{"type": "text", "text": system}]},
                {
                    "role": "user",
                    "content": [
                        {"type": "image", "data": to_base64(image)},
                        {"type": "text", "text": task},
                    ],
                },
            ],
        }
        body = await self._client.post_json(request)
        text = body.get("text")
        if not isinstance(text, str):
            raise CompletionError(f"extraction response for {ref} has no text")
        return text

    async def aclose(self) -> None:
        await self._client.aclose()


class MockScript(BaseModel):
    """Scripted behaviour of the mock client, loaded from JSON.

    - responses: structured output per query item id (object or listing text)
    - echo_first_sample: answer with the first context sample's records
      when no scripted response exists
    - null_above_samples: answer all-null when the prompt has more samples
    - descriptions / default_description: extraction output per item id
    - fail_extraction: every extraction request fails
    """

    responses: dict[str, dict[str, Any] | str] = Field(default_factory=dict)
    echo_first_sample: bool = False
    null_above_samples: Optional[int] = Field(default=None, ge=1)
    descriptions: dict[str, str] = Field(default_factory=dict)
    default_description: Optional[str] = None
    fail_extraction: bool = False


_NULL_RESPONSE = {field: None for field in PREDICTION_FIELDS}


class MockVlmClient:
    """Deterministic offline VLM. Records every request it receives."""

    def __init__(self, script: Optional[MockScript] = None):
        self.script = script or MockScript()
        self.requests: list[PromptDocument] = []
        self.extraction_requests: list[tuple[str, str, Optional[str]]] = []

    @classmethod
    def from_file(cls, path: Path) -> "MockVlmClient":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(MockScript.model_validate(data))
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            raise ConfigError(f"cannot load mock VLM script {path}: {e}") from e

    def _answer(self, prompt: PromptDocument) -> dict[str, Any] | str:
        script = self.script
        if script.null_above_samples is not None and prompt.n_samples > script.null_above_samples:
            return dict(_NULL_RESPONSE)
        if prompt.query_id in script.responses:
            return script.responses[prompt.query_id]
        if script.echo_first_sample and prompt.samples:
            return prompt.samples[0].target.to_wire()
        return dict(_NULL_RESPONSE)

    async def complete(
        self, prompt: PromptDocument, schema: Optional[dict[str, Any]] = None
    ) -> VlmResponse:
        self.requests.append(prompt)
        payload = self._answer(prompt)
        text = payload if isinstance(payload, str) else json.dumps(payload)
        return VlmResponse(
            payload=payload,
            input_tokens=prompt.estimate_tokens(),
            output_tokens=math.ceil(len(text.encode("utf-8")) / 4),
        )

    async def extract_text(
        self, system: str, task: str, image: Image.Image, ref: Optional[str] = None
    ) -> str:
        self.extraction_requests.append((system, task, ref))
        if self.script.fail_extraction:
            raise CompletionError(f"scripted extraction failure for {ref}")
        if ref is not None and ref in self.script.descriptions:
            return self.script.descriptions[ref]
        return self.script.default_description or ""

    async def aclose(self) -> None:
        return None


def get_vlm_client(config: VlmConfig, env: Settings = settings) -> VlmClient:
    if config.kind == VlmKind.REMOTE:
        return RemoteVlmClient(
            config.url,
            config.model,
            token=env.VLM_API_KEY,
            timeout=config.timeout,
            retries=config.retries,
            max_in_flight=config.max_in_flight,
        )
    if config.script is None:
        log.warning("Mock VLM without a script answers all-null")
        return MockVlmClient()
    return MockVlmClient.from_file(config.script)
