import pytest

from app.dataset.dataset_store import Dataset
from app.errors import NoContextAvailable, UnknownLabel
from app.pipeline.context import assemble_context
from app.vstore import RetrievalHit
from tests.conftest import make_item


@pytest.fixture
def small_dataset(image_file) -> Dataset:
    return Dataset(
        [
            make_item("a1", "A", image_file),
            make_item("a2", "A", image_file),
            make_item("a3", "A", image_file),
            make_item("a4", "A", image_file),
            make_item("a5", "A", image_file, split="test"),
            make_item("b1", "B", image_file),
            make_item("d1", "D", image_file),
            make_item("d2", "D", image_file),
            make_item("c1", "C", image_file, split="test"),
        ]
    )


def hits(*entries: tuple[str, str, str, float]) -> list[RetrievalHit]:
    return [
        RetrievalHit(
            store_id=i, label=label, item_id=item_id, modality=modality, distance=distance
        )
        for i, (label, item_id, modality, distance) in enumerate(entries)
    ]


def test_nearest_distinct_train_items_of_the_label(small_dataset):
    retrieved = hits(
        ("A", "a3", "image", 0.1),
        ("A", "a3", "text", 0.15),
        ("B", "b1", "image", 0.2),
        ("A", "a1", "image", 0.3),
        ("A", "a5", "image", 0.35),
        ("A", "a2", "text", 0.4),
    )
    context = assemble_context("A", retrieved, small_dataset, max_samples=3)
    assert [s.item_id for s in context] == ["a3", "a1", "a2"]
    assert [s.distance for s in context] == [0.1, 0.3, 0.4]
    assert all(s.item.label == "A" for s in context)


def test_fewer_train_items_than_max_samples(small_dataset):
    retrieved = hits(("D", "d2", "image", 0.0), ("D", "d1", "image", 0.2))
    context = assemble_context("D", retrieved, small_dataset, max_samples=3)
    assert [s.item_id for s in context] == ["d2", "d1"]


def test_item_hit_through_both_modalities_is_used_once(small_dataset):
    retrieved = hits(("B", "b1", "image", 0.05), ("B", "b1", "text", 0.07))
    context = assemble_context("B", retrieved, small_dataset)
    assert [s.item_id for s in context] == ["b1"]
    assert context[0].distance == 0.05


def test_falls_back_to_ingest_order_without_hits_of_the_label(small_dataset):
    retrieved = hits(("B", "b1", "image", 0.05))
    context = assemble_context("A", retrieved, small_dataset, max_samples=2)
    assert [s.item_id for s in context] == ["a1", "a2"]
    assert all(s.distance is None for s in context)


def test_label_without_train_items(small_dataset):
    with pytest.raises(NoContextAvailable):
        assemble_context("C", [], small_dataset)
    with pytest.raises(UnknownLabel):
        assemble_context("Z", [], small_dataset)
    with pytest.raises(ValueError):
        assemble_context("A", [], small_dataset, max_samples=0)


def test_samples_carry_ground_truth_records(dataset):
    item = dataset.get("lorenz-saltletts-250g-1")
    retrieved = hits(("lorenz-saltletts-250g", item.item_id, "image", 0.0))
    (sample,) = assemble_context("lorenz-saltletts-250g", retrieved, dataset, max_samples=1)
    assert sample.target.brand == "Lorenz"
    assert [g.digits for g in sample.target.gtins] == ["04018077683015", "04018077686719"]
