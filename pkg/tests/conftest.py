"""Shared fixtures: a generated 4-class dataset, its run config and index."""

import asyncio
from pathlib import Path
from typing import Any

import pytest
from PIL import Image

from app.config import RunConfig, load_run_config
from app.dataset.dataset_schemas import DatasetItem
from app.dataset.dataset_store import Dataset
from app.pipeline.runner import build_clients, index_items
from app.scripts.gen_fixture import FixturePaths, write_fixture
from app.vstore import VectorStore


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture
def fixture_paths(tmp_path: Path) -> FixturePaths:
    return write_fixture(tmp_path / "fixture")


@pytest.fixture
def dataset(fixture_paths: FixturePaths) -> Dataset:
    return Dataset.from_manifest(fixture_paths.manifest)


@pytest.fixture
def run_config(fixture_paths: FixturePaths) -> RunConfig:
    return load_run_config(fixture_paths.config)


def build_index(dataset: Dataset, config: RunConfig) -> VectorStore:
    async def _build():
        clients = build_clients(config)
        try:
            store = VectorStore(clients.embedder.dimension)
            await index_items(dataset.items(), store, clients, config)
            return store
        finally:
            await clients.aclose()

    return asyncio.run(_build())


@pytest.fixture
def store(dataset: Dataset, run_config: RunConfig) -> VectorStore:
    return build_index(dataset, run_config)


def make_item(
    item_id: str,
    label: str,
    image_path: Path,
    split: str = "train",
    product: dict[str, Any] | None = None,
    promotion: dict[str, Any] | None = None,
) -> DatasetItem:
    return DatasetItem.model_validate(
        {
            "item_id": item_id,
            "image_path": image_path,
            "split": split,
            "label": label,
            "product": product or {},
            "promotion": promotion or {},
        }
    )


@pytest.fixture
def image_file(tmp_path: Path) -> Path:
    path = tmp_path / "ad.png"
    Image.new("RGB", (40, 30), (200, 40, 40)).save(path)
    return path
