"""Few-shot context: train items of the classified label."""

from loguru import logger as log

from app.dataset.dataset_store import Dataset
from app.errors import NoContextAvailable
from app.pipeline.pipeline_schemas import FewShotSample
from app.vstore import RetrievalHit, filter_by_label


def assemble_context(
    label: str, hits: list[RetrievalHit], dataset: Dataset, max_samples: int = 3
) -> list[FewShotSample]:
    """Pick up to ``max_samples`` train items of ``label``, nearest first.

    Hits of the label give the order; one item can be hit through its image
    and its text embedding but is used once. When no hit of the label
    names a train item the label's first train items are used instead.
    """
    if max_samples < 1:
        raise ValueError("max_samples must be >= 1")
    train = dataset.relational_query(label)
    if not train:
        raise NoContextAvailable(f"label {label!r} has no train items")

    distances: dict[str, float] = {}
    for hit in filter_by_label(hits, label):
        distances.setdefault(hit.item_id, hit.distance)
    train_ids = {item.item_id for item in train}
    ordered = [item_id for item_id in distances if item_id in train_ids]

    if not ordered:
        log.debug(f"No retrieved train item for {label!r}, using ingest order")
        return [FewShotSample(item=item) for item in train[:max_samples]]

    items = dataset.relational_query(label, ordered)[: len(ordered)]
    return [
        FewShotSample(item=item, distance=distances[item.item_id])
        for item in items[:max_samples]
    ]
