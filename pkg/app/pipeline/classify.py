"""Majority-vote classification over the top-k retrieval hits."""

from collections import Counter

from app.db.enums import DecidedBy, Modality
from app.embed import EmbeddingVector
from app.pipeline.pipeline_schemas import ClassificationOutcome
from app.vstore import RetrievalHit, VectorStore


def decide_label(hits: list[RetrievalHit]) -> tuple[str, dict[str, int], DecidedBy]:
    """Mode of the hit labels.

    Ties between modes go to the nearest image hit carrying a tied label,
    otherwise to the nearest hit of any modality carrying a tied label.
    ``hits`` must be ordered by ascending distance.
    """
    if not hits:
        raise ValueError("cannot classify without hits")
    votes = dict(Counter(hit.label for hit in hits))
    top = max(votes.values())
    modes = {label for label, count in votes.items() if count == top}
    if len(modes) == 1:
        return next(iter(modes)), votes, DecidedBy.MAJORITY

    for hit in hits:
        if hit.modality == Modality.IMAGE and hit.label in modes:
            return hit.label, votes, DecidedBy.IMAGE_TIEBREAK
    nearest = next(hit for hit in hits if hit.label in modes)
    return nearest.label, votes, DecidedBy.OVERALL_NEAREST_FALLBACK


def classify(
    query_embedding: EmbeddingVector, store: VectorStore, k: int = 5
) -> ClassificationOutcome:
    """Retrieve the k nearest embeddings and vote on their labels.

    Raises EmptyStore when nothing is indexed.
    """
    hits = store.search_topk(query_embedding, k)
    label, votes, decided_by = decide_label(hits)
    return ClassificationOutcome(label=label, votes=votes, decided_by=decided_by, hits=hits)
