"""JSON-over-HTTP client shared by the remote embedder, segmenter and VLM.

In-flight requests are bounded by a semaphore; transport errors and 5xx
responses are retried with exponential backoff, 4xx are not.
"""

import asyncio
from typing import Any, Optional

import httpx
from loguru import logger as log
from pydantic import SecretStr

from app.errors import VisualRagError


class ServiceClient:
    """POST JSON to one endpoint and read a JSON object back."""

    def __init__(
        self,
        url: str,
        *,
        token: Optional[SecretStr] = None,
        timeout: float = 60.0,
        retries: int = 3,
        retry_delay: float = 0.5,
        max_in_flight: int = 4,
        error_cls: type[VisualRagError] = VisualRagError,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        self.url = url
        self.retries = retries
        self.retry_delay = retry_delay
        self.error_cls = error_cls
        headers = {"Content-Type": "application/json"}
        if token is not None:
            headers["Authorization"] = f"Bearer {token.get_secret_value()}"
        self._client = httpx.AsyncClient(
            headers=headers, timeout=timeout, transport=transport
        )
        self._in_flight = asyncio.Semaphore(max_in_flight)

    async def post_json(self, payload: dict[str, Any]) -> dict[str, Any]:
        last_error: Exception | None = None
        async with self._in_flight:
            for attempt in range(self.retries + 1):
                if attempt:
                    await asyncio.sleep(self.retry_delay * 2 ** (attempt - 1))
                try:
                    response = await self._client.post(self.url, json=payload)
                except httpx.TransportError as e:
                    last_error = e
                    log.warning(f"{self.url}: attempt {attempt + 1} failed: {e!r}")
                    continue
                if response.status_code >= 500:
                    last_error = httpx.HTTPStatusError(
                        f"server error {response.status_code}",
                        request=response.request,
                        response=response,
                    )
                    log.warning(
                        f"{self.url}: attempt {attempt + 1} got {response.status_code}"
                    )
                    continue
                if response.status_code >= 400:
                    raise self.error_cls(
                        f"{self.url} rejected the request: "
                        f"{response.status_code} {response.text[:200]}"
                    )
                try:
                    body = response.json()
                except ValueError as e:
                    raise self.error_cls(f"{self.url} returned invalid JSON") from e
                if not isinstance(body, dict):
                    raise self.error_cls(f"{self.url} returned a non-object body")
                return body

        raise self.error_cls(
            f"{self.url} failed after {self.retries + 1} attempts: {last_error!r}"
        )

    async def aclose(self) -> None:
        await self._client.aclose()
