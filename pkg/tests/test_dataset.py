import json
from pathlib import Path

import pytest

from app.dataset.dataset_crud import get_paginated_items
from app.dataset.dataset_store import Dataset
from app.db.enums import Split
from app.domain import normalize_gtin
from app.errors import DuplicateItem, IngestError, UnknownItem, UnknownLabel

from tests.conftest import make_item


def write_manifest(path: Path, rows: list) -> Path:
    path.write_text(
        "\n".join(row if isinstance(row, str) else json.dumps(row) for row in rows) + "\n",
        encoding="utf-8",
    )
    return path


def row(item_id: str, label: str = "a", split: str = "train", gtins=("24000952",)) -> dict:
    return {
        "item_id": item_id,
        "image_path": "ad.png",
        "split": split,
        "label": label,
        "product": {"brand": "X", "GTINs": list(gtins)},
        "promotion": {"price": 1.0},
    }


def test_ingest_fixture(dataset: Dataset):
    stats = dataset.stats()
    assert stats.n_items == 12
    assert stats.n_train == 8
    assert stats.n_test == 4
    assert stats.n_classes == 4
    assert set(stats.per_class_train.values()) == {2}


def test_image_paths_resolve_against_manifest(dataset: Dataset):
    for item in dataset.items():
        assert item.image_path.is_absolute()
        assert item.image_path.is_file()


def test_missing_manifest(tmp_path: Path):
    with pytest.raises(IngestError, match="cannot read manifest"):
        Dataset.from_manifest(tmp_path / "nope.jsonl")


def test_malformed_line_is_named(tmp_path: Path, image_file: Path):
    rows = [row(f"i{n}") for n in range(1, 7)] + ["{not json"]
    manifest = write_manifest(tmp_path / "manifest.jsonl", rows)
    dataset = Dataset()
    with pytest.raises(IngestError, match="line 7") as excinfo:
        dataset.ingest_manifest(manifest)
    assert excinfo.value.line_no == 7
    # Nothing is stored from a rejected manifest
    assert len(dataset) == 0


def test_missing_image_is_rejected(tmp_path: Path, image_file: Path):
    bad = row("i1") | {"image_path": "missing.png"}
    manifest = write_manifest(tmp_path / "manifest.jsonl", [bad])
    with pytest.raises(IngestError, match="image not found"):
        Dataset.from_manifest(manifest)


def test_duplicate_item(tmp_path: Path, image_file: Path):
    manifest = write_manifest(tmp_path / "manifest.jsonl", [row("i1"), row("i1")])
    with pytest.raises(DuplicateItem, match="line 2"):
        Dataset.from_manifest(manifest)


def test_invalid_gtin_is_an_ingest_error(tmp_path: Path, image_file: Path):
    manifest = write_manifest(tmp_path / "manifest.jsonl", [row("i1", gtins=["12x"])])
    with pytest.raises(IngestError, match="line 1"):
        Dataset.from_manifest(manifest)


def test_relational_query_orders_and_excludes_test(image_file: Path):
    dataset = Dataset(
        [
            make_item("t1", "a", image_file),
            make_item("t2", "a", image_file),
            make_item("t3", "a", image_file),
            make_item("q1", "a", image_file, split="test"),
            make_item("b1", "b", image_file),
        ]
    )
    ids = [item.item_id for item in dataset.relational_query("a", ["t3", "q1", "b1"])]
    assert ids == ["t3", "t1", "t2"]
    assert [i.item_id for i in dataset.relational_query("a")] == ["t1", "t2", "t3"]


def test_unknown_label_and_item(dataset: Dataset):
    with pytest.raises(UnknownLabel):
        dataset.relational_query("nope")
    with pytest.raises(UnknownLabel):
        dataset.class_gtin_union("nope")
    with pytest.raises(UnknownItem):
        dataset.get("nope")


def test_class_gtin_union_spans_all_splits(image_file: Path):
    dataset = Dataset(
        [
            make_item("t1", "a", image_file, product={"GTINs": ["04018077683015"]}),
            make_item(
                "q1", "a", image_file, split="test",
                product={"GTINs": ["4018077683015", "04018077686719"]},
            ),
        ]
    )
    assert dataset.class_gtin_union("a") == {
        normalize_gtin("04018077683015"),
        normalize_gtin("04018077686719"),
    }
    assert dataset.class_label("a").gtin_union == dataset.class_gtin_union("a")



def test_ketchup_classes_differing_in_gtin_have_disjoint_unions(image_file: Path):
    heinz = {"brand": "Heinz", "product_category": ["Ketchup"]}
    dataset = Dataset(
        [
            make_item(
                "k1", "heinz-ketchup-500ml", image_file,
                product={**heinz, "GTINs": ["08715700017006"]},
            ),
            make_item(
                "k2", "heinz-ketchup-875ml", image_file,
                product={**heinz, "GTINs": ["87157215"]},
            ),
        ]
    )
    small = dataset.class_gtin_union("heinz-ketchup-500ml")
    large = dataset.class_gtin_union("heinz-ketchup-875ml")
    assert small == {normalize_gtin("08715700017006")}
    assert large == {normalize_gtin("00000087157215")}
    assert small.isdisjoint(large)

def test_every_item_gtins_within_union(dataset: Dataset):
    for item in dataset.items():
        assert set(item.product.gtins) <= dataset.class_gtin_union(item.label)
        assert dataset.class_gtin_union(item.label)


def test_items_by_split_keep_order(dataset: Dataset):
    test_items = dataset.items(Split.TEST)
    assert len(test_items) == 4
    assert all(item.split == Split.TEST for item in test_items)
    assert dataset.labels() == sorted({item.label for item in dataset.items()})


def test_pagination(dataset: Dataset):
    page = get_paginated_items(dataset, page=2, results_per_page=5)
    assert len(page.results) == 5
    assert page.pagination.total == 12
    assert page.pagination.pages == 3
    assert page.pagination.has_prev and page.pagination.has_next

    last = get_paginated_items(dataset, page=3, results_per_page=5, split=Split.TRAIN)
    assert len(last.results) == 0
    assert last.pagination.total == 8
