"""Run the pipeline over dataset items.

A run reads the store only; items are independent and run concurrently up
to ``workers``, and their results reach the sink in input order.
"""

import asyncio
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from loguru import logger as log
from PIL import Image
from pydantic import BaseModel, Field, ValidationError

from app.config import RunConfig, Settings, settings
from app.dataset.dataset_schemas import DatasetItem
from app.dataset.dataset_store import Dataset
from app.db.enums import Modality, Split
from app.domain import prediction_json_schema
from app.embed import Embedder, get_embedder
from app.errors import ImageError, VisualRagError
from app.images import load_image
from app.pipeline.classify import classify
from app.pipeline.completion import complete
from app.pipeline.context import assemble_context
from app.pipeline.pipeline_schemas import (
    ClassificationOutcome,
    CompletionTrace,
    ItemError,
    ItemResult,
    PromptDocument,
)
from app.pipeline.prompt import generate_prompt
from app.pipeline.vlm_clients import VlmClient, get_vlm_client
from app.preprocess import Segmenter, get_segmenter, preprocess_image
from app.vstore import StoredEmbedding, VectorStore


@dataclass
class Clients:
    """The three remote-capable collaborators of a run."""

    embedder: Embedder
    segmenter: Segmenter
    vlm: VlmClient

    async def aclose(self) -> None:
        for client in (self.embedder, self.segmenter, self.vlm):
            await client.aclose()


def build_clients(config: RunConfig, env: Settings = settings) -> Clients:
    return Clients(
        embedder=get_embedder(config.embedder, env),
        segmenter=get_segmenter(config.segmenter, env),
        vlm=get_vlm_client(config.vlm, env),
    )


def item_error(e: Exception) -> ItemError:
    return ItemError(
        stage=getattr(e, "stage", "pipeline"), type=type(e).__name__, message=str(e)
    )


async def predict_image(
    image: Image.Image,
    query_id: Optional[str],
    store: VectorStore,
    dataset: Dataset,
    clients: Clients,
    config: RunConfig,
) -> tuple[ClassificationOutcome, CompletionTrace, PromptDocument]:
    """Classify an advertisement image and extract its features."""
    preprocessed = await preprocess_image(image, clients.segmenter, config.segmenter.prompt)
    query_embedding = await clients.embedder.embed_image(preprocessed.product_crop)
    outcome = classify(query_embedding, store, config.k)
    context = assemble_context(outcome.label, outcome.hits, dataset, config.max_samples)
    prompt = generate_prompt(
        config.task,
        context,
        image,
        config.budget,
        image_tokens=config.image_tokens,
        query_id=query_id,
    )
    trace = await complete(prompt, clients.vlm, prediction_json_schema())
    return outcome, trace, prompt


async def run_item(
    test_item: DatasetItem,
    store: VectorStore,
    dataset: Dataset,
    clients: Clients,
    config: RunConfig,
) -> tuple[ClassificationOutcome, CompletionTrace]:
    image = load_image(test_item.image_path, error_cls=ImageError)
    outcome, trace, _ = await predict_image(
        image, test_item.item_id, store, dataset, clients, config
    )
    return outcome, trace


async def _run_one(
    item: DatasetItem,
    store: VectorStore,
    dataset: Dataset,
    clients: Clients,
    config: RunConfig,
) -> ItemResult:
    try:
        image = load_image(item.image_path, error_cls=ImageError)
        outcome, trace, prompt = await predict_image(
            image, item.item_id, store, dataset, clients, config
        )
    except Exception as e:
        error = item_error(e)
        log.warning(f"{item.item_id}: {error.stage} failed: {error.type}: {error.message}")
        return ItemResult(item_id=item.item_id, error=error)
    return ItemResult(
        item_id=item.item_id,
        outcome=outcome,
        trace=trace,
        prompt_samples=[sample.item_id for sample in prompt.samples],
    )


class OrderedSink:
    """Emit results in submission order, whatever order they finish in."""

    def __init__(self, emit: Callable[[ItemResult], None]):
        self._emit = emit
        self._pending: dict[int, ItemResult] = {}
        self._next = 0

    def put(self, index: int, result: ItemResult) -> None:
        self._pending[index] = result
        while self._next in self._pending:
            self._emit(self._pending.pop(self._next))
            self._next += 1


async def run_batch(
    items: Iterable[DatasetItem],
    store: VectorStore,
    dataset: Dataset,
    clients: Clients,
    config: RunConfig,
    done_ids: Iterable[str] = (),
    sink: Optional[Callable[[ItemResult], None]] = None,
) -> list[ItemResult]:
    """Run every item not in ``done_ids``; failures are recorded, never raised."""
    done = set(done_ids)
    pending = [item for item in items if item.item_id not in done]
    if done:
        log.info(f"Resuming: {len(done)} items already done, {len(pending)} to go")

    ordered = OrderedSink(sink or (lambda result: None))
    workers = asyncio.Semaphore(config.workers)

    async def worker(index: int, item: DatasetItem) -> ItemResult:
        async with workers:
            result = await _run_one(item, store, dataset, clients, config)
        ordered.put(index, result)
        return result

    results = await asyncio.gather(*(worker(i, item) for i, item in enumerate(pending)))
    failed = sum(1 for r in results if r.error is not None)
    log.info(f"Ran {len(results)} items, {failed} failed")
    return list(results)


class TraceFile:
    """JSONL traces, one ItemResult per line, appended by a single writer."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def read(self) -> list[ItemResult]:
        if not self.path.exists():
            return []
        results = []
        for line_no, line in enumerate(
            self.path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                results.append(ItemResult.model_validate_json(line))
            except ValidationError as e:
                raise VisualRagError(
                    f"{self.path} line {line_no}: invalid trace: {e}", stage="eval"
                ) from e
        return results

    def done_ids(self) -> set[str]:
        return {result.item_id for result in self.read()}

    def append(self, result: ItemResult) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as f:
            f.write(result.model_dump_json() + "\n")


class IndexFailure(BaseModel):
    item_id: str
    error: ItemError


class IndexSummary(BaseModel):
    """What an index build added to the store."""

    n_items: int = 0
    n_indexed: int = 0
    counts_by_modality: dict[str, int] = Field(default_factory=dict)
    n_empty_masks: int = 0
    n_extraction_failures: int = 0
    failures: list[IndexFailure] = Field(default_factory=list)


@dataclass(frozen=True)
class _Indexed:
    item: DatasetItem
    embeddings: tuple[StoredEmbedding, ...] = ()
    empty_mask: bool = False
    extraction_error: Optional[str] = None
    error: Optional[ItemError] = None


async def _index_one(item: DatasetItem, clients: Clients, config: RunConfig) -> _Indexed:
    try:
        image = load_image(item.image_path, error_cls=ImageError)
        preprocessed = await preprocess_image(
            image,
            clients.segmenter,
            config.segmenter.prompt,
            vlm_client=clients.vlm,
            ref=item.item_id,
        )
        embeddings = [
            StoredEmbedding(
                await clients.embedder.embed_image(preprocessed.product_crop),
                item.label,
                item.item_id,
            )
        ]
        if preprocessed.description_text:
            embeddings.append(
                StoredEmbedding(
                    await clients.embedder.embed_text(preprocessed.description_text),
                    item.label,
                    item.item_id,
                )
            )
    except Exception as e:
        error = item_error(e)
        log.warning(f"{item.item_id}: indexing failed in {error.stage}: {error.message}")
        return _Indexed(item, error=error)
    return _Indexed(
        item,
        tuple(embeddings),
        empty_mask=preprocessed.empty_mask,
        extraction_error=preprocessed.extraction_error,
    )


async def index_items(
    items: Sequence[DatasetItem],
    store: VectorStore,
    clients: Clients,
    config: RunConfig,
) -> IndexSummary:
    """Embed the product crop and description of every train item into ``store``.

    Items are preprocessed concurrently and added in input order, so store
    ids do not depend on scheduling.
    """
    train = [item for item in items if item.split == Split.TRAIN]
    workers = asyncio.Semaphore(config.workers)

    async def worker(item: DatasetItem) -> _Indexed:
        async with workers:
            return await _index_one(item, clients, config)

    indexed = await asyncio.gather(*(worker(item) for item in train))

    summary = IndexSummary(n_items=len(train))
    for entry in indexed:
        if entry.error is not None:
            summary.failures.append(IndexFailure(item_id=entry.item.item_id, error=entry.error))
            continue
        for embedding in entry.embeddings:
            store.add(embedding)
        summary.n_indexed += 1
        summary.n_empty_masks += entry.empty_mask
        if entry.extraction_error and not entry.empty_mask:
            summary.n_extraction_failures += 1

    summary.counts_by_modality = store.counts_by_modality()
    if summary.n_indexed and summary.counts_by_modality.get(Modality.TEXT, 0) == 0:
        log.warning("No description text was extracted, the index is image-only")
    log.info(
        f"Indexed {summary.n_indexed}/{summary.n_items} train items: "
        f"{summary.counts_by_modality}"
    )
    return summary
