"""Config for the pipeline, using environment variables and a JSON run file."""

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, Field, SecretStr, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.db.enums import EmbedderKind, GtinMetric, SegmenterKind, VlmKind
from app.errors import ConfigError


class Settings(BaseSettings):
    """Process-level settings; secrets only ever come from here."""

    model_config = SettingsConfigDict(
        case_sensitive=True,
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # DEBUG mode for development
    DEBUG: bool = False
    APP_NAME: str = "visual-rag-fgc"
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    # Relational store, optional (manifest ingest is the default)
    DB_CONN_URL: Optional[str] = None
    # Run config used by the HTTP service
    RUN_CONFIG: Optional[str] = None
    VLM_API_KEY: Optional[SecretStr] = None
    EMBEDDER_API_TOKEN: Optional[SecretStr] = None
    SEGMENTER_API_TOKEN: Optional[SecretStr] = None


@lru_cache
def get_settings() -> Settings:
    """Cache settings when accessed throughout app."""
    _settings = Settings()

    if _settings.DEBUG:
        # Enable detailed Python async debugger
        os.environ["PYTHONASYNCIODEBUG"] = "1"
    return _settings


class EmbedderConfig(BaseModel):
    """Which embedder produces the store vectors."""

    kind: EmbedderKind = EmbedderKind.REFERENCE
    url: Optional[str] = None
    dimension: int = Field(default=64, ge=1)
    max_in_flight: int = Field(default=4, ge=1)
    timeout: float = Field(default=30.0, gt=0)
    retries: int = Field(default=3, ge=0)


class SegmenterConfig(BaseModel):
    """Segmentation client settings."""

    kind: SegmenterKind = SegmenterKind.STUB
    url: Optional[str] = None
    prompt: str = "product."
    max_in_flight: int = Field(default=4, ge=1)
    timeout: float = Field(default=60.0, gt=0)
    retries: int = Field(default=3, ge=0)


class VlmConfig(BaseModel):
    """Vision-language model client settings."""

    kind: VlmKind = VlmKind.MOCK
    url: Optional[str] = None
    model: Optional[str] = None
    # Mock script (JSON), see app.pipeline.vlm_clients.MockVlmClient
    script: Optional[Path] = None
    timeout: float = Field(default=60.0, gt=0)
    retries: int = Field(default=3, ge=0)
    max_in_flight: int = Field(default=4, ge=1)


class PriceTable(BaseModel):
    """Currency per token."""

    input: float = Field(default=0.0, ge=0)
    output: float = Field(default=0.0, ge=0)


class RunConfig(BaseModel):
    """Everything a pipeline run needs, file + flag overrides."""

    manifest: Optional[Path] = None
    snapshot: Optional[Path] = None
    traces: Optional[Path] = None
    embedder: EmbedderConfig = EmbedderConfig()
    segmenter: SegmenterConfig = SegmenterConfig()
    vlm: VlmConfig = VlmConfig()
    k: int = Field(default=5, ge=1)
    max_samples: int = Field(default=3, ge=1)
    budget: int = Field(default=128_000, gt=0)
    # Estimated tokens per image part of a prompt
    image_tokens: int = Field(default=25_000, ge=0)
    workers: int = Field(default=4, ge=1)
    prices: PriceTable = PriceTable()
    gtin_metric: GtinMetric = GtinMetric.EXACT_SET
    task: str = "Extract all features"
    run_name: str = "run"

    @model_validator(mode="after")
    def check_remote_urls(self) -> "RunConfig":
        """Remote clients need an endpoint."""
        for name, sub in (
            ("embedder", self.embedder),
            ("segmenter", self.segmenter),
            ("vlm", self.vlm),
        ):
            if sub.kind == "remote" and not sub.url:
                raise ValueError(f"{name}: remote kind requires a url")
        return self


def load_run_config(
    path: Optional[Path] = None, overrides: Optional[dict[str, Any]] = None
) -> RunConfig:
    """Read a JSON run config and apply flag overrides on top.

    Override keys may be dotted (``vlm.url``) to reach sub-models.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        target = data
        *parents, leaf = key.split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
        target[leaf] = value

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


settings = get_settings()
