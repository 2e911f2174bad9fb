"""Models passed between pipeline stages and written to trace files."""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from PIL import Image
from pydantic import BaseModel, ConfigDict, Field

from app.dataset.dataset_schemas import DatasetItem
from app.db.enums import DecidedBy
from app.domain import Prediction
from app.images import load_image
from app.vstore import RetrievalHit


class ClassificationOutcome(BaseModel):
    """Label chosen from the retrieved hits and how it was decided."""

    model_config = ConfigDict(frozen=True)

    label: str
    votes: dict[str, int]
    decided_by: DecidedBy
    hits: list[RetrievalHit]


class FewShotSample(BaseModel):
    """A train item used as context: its image and its records."""

    model_config = ConfigDict(frozen=True)

    item: DatasetItem
    distance: Optional[float] = None

    @property
    def item_id(self) -> str:
        return self.item.item_id

    @property
    def target(self) -> Prediction:
        return Prediction.from_records(self.item.product, self.item.promotion)


@dataclass(frozen=True)
class TextPart:
    text: str
    role: str = "user"

    def estimate_tokens(self) -> int:
        return math.ceil(len(self.text.encode("utf-8")) / 4)


@dataclass(frozen=True)
class ImagePart:
    """An image in a prompt, held in memory or read from disk on demand."""

    ref: str
    path: Optional[Path] = None
    image: Optional[Image.Image] = field(default=None, compare=False, repr=False)
    role: str = "user"

    def load(self) -> Image.Image:
        if self.image is not None:
            return self.image
        return load_image(self.path)


@dataclass(frozen=True)
class ContextSample:
    """Prompt form of a FewShotSample: an image part then its record text."""

    item_id: str
    image: ImagePart
    record: TextPart
    target: Prediction


@dataclass(frozen=True)
class PromptDocument:
    """Task text, then 1 to N context samples, then the query image."""

    task: TextPart
    samples: tuple[ContextSample, ...]
    query: ImagePart
    query_id: Optional[str] = None
    image_tokens: int = 25_000
    # Samples dropped to fit the token budget
    dropped: int = 0

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def parts(self) -> list[TextPart | ImagePart]:
        parts: list[TextPart | ImagePart] = [self.task]
        for sample in self.samples:
            parts.extend((sample.image, sample.record))
        parts.append(self.query)
        return parts

    def estimate_tokens(self) -> int:
        """ceil(bytes / 4) per text part, a fixed estimate per image part."""
        return sum(
            part.estimate_tokens() if isinstance(part, TextPart) else self.image_tokens
            for part in self.parts
        )

    def truncated(self, n_samples: int) -> "PromptDocument":
        """Keep the first ``n_samples`` samples, dropping from the tail."""
        if not 1 <= n_samples <= self.n_samples:
            raise ValueError(f"cannot keep {n_samples} of {self.n_samples} samples")
        return replace(
            self,
            samples=self.samples[:n_samples],
            dropped=self.dropped + self.n_samples - n_samples,
        )


class Attempt(BaseModel):
    """One model request within a completion."""

    n_samples: int
    all_null: bool
    input_tokens: int = 0
    output_tokens: int = 0
    elapsed: float = 0.0
    schema_error: Optional[str] = None


class CompletionTrace(BaseModel):
    """Final prediction plus per-attempt accounting, summed over attempts."""

    prediction: Prediction
    input_tokens: int = 0
    output_tokens: int = 0
    elapsed: float = 0.0
    attempts: list[Attempt] = Field(min_length=1)

    @property
    def reduced(self) -> bool:
        return len(self.attempts) > 1


class ItemError(BaseModel):
    stage: str
    type: str
    message: str


class ItemResult(BaseModel):
    """One line of a traces file."""

    item_id: str
    outcome: Optional[ClassificationOutcome] = None
    trace: Optional[CompletionTrace] = None
    prompt_samples: list[str] = Field(default_factory=list)
    error: Optional[ItemError] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.trace is not None
