"""Exceptions raised across the pipeline.

Each error names the pipeline stage it belongs to, so a failed item can be
recorded in its trace and the batch continues.
"""

from typing import Optional


class VisualRagError(Exception):
    """Base class, carries the stage that failed."""

    stage = "pipeline"

    def __init__(self, message: str = "", *, stage: Optional[str] = None):
        super().__init__(message or self.__class__.__name__)
        if stage is not None:
            self.stage = stage

    @property
    def message(self) -> str:
        return str(self)


class ConfigError(VisualRagError):
    stage = "config"


class InvalidGtin(VisualRagError, ValueError):
    stage = "domain"


class SchemaError(VisualRagError):
    """A model response could not be read as a Prediction."""

    stage = "completion"


class IngestError(VisualRagError):
    stage = "dataset"

    def __init__(self, message: str, line_no: Optional[int] = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


class DuplicateItem(IngestError):
    pass


class UnknownLabel(VisualRagError, KeyError):
    stage = "dataset"

    def __str__(self) -> str:
        return self.args[0] if self.args else "unknown label"


class UnknownItem(VisualRagError, KeyError):
    stage = "dataset"

    def __str__(self) -> str:
        return self.args[0] if self.args else "unknown item"


class EmbedError(VisualRagError):
    stage = "embed"


class DimensionError(VisualRagError, ValueError):
    stage = "vstore"


class EmptyStore(VisualRagError):
    stage = "retrieval"


class SnapshotError(VisualRagError):
    stage = "vstore"


class SegmentationError(VisualRagError):
    stage = "preprocess"


class EmptyMask(VisualRagError):
    stage = "preprocess"


class ExtractionError(VisualRagError):
    stage = "preprocess"


class NoContextAvailable(VisualRagError):
    stage = "context"


class BudgetExceeded(VisualRagError):
    stage = "prompt"


class CompletionError(VisualRagError):
    stage = "completion"


class EvalError(VisualRagError):
    stage = "eval"


class ImageError(VisualRagError):
    """An image file could not be decoded."""

    stage = "preprocess"
