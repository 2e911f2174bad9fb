"""Generate a small offline fixture: images, manifest, mock VLM script, run config.

Every item of a class shares one solid colour and one record, so the
reference embedder retrieves the right class and a mock VLM echoing the
first context sample reproduces the ground truth.

    python -m app.scripts.gen_fixture fixture/ [--descriptions] [--null-above 1]
"""

import argparse
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from PIL import Image, ImageDraw

from app.domain import gtin_check_digit

IMAGE_SIZE = 64
FRAME = 4

# Per channel, no two classes share a histogram bin
CLASS_COLOURS = [(16, 80, 144), (80, 144, 208), (144, 208, 16), (208, 16, 80)]


def with_check_digit(first13: str) -> str:
    return first13 + str(gtin_check_digit(first13))


CLASSES: list[dict[str, Any]] = [
    {
        "label": "lorenz-saltletts-250g",
        "product": {
            "brand": "Lorenz",
            "product_category": ["Salzgebäck", "Laugengebäck"],
            "GTINs": ["04018077683015", "04018077686719"],
            "weight_number": 250.0,
            "weight_unit": "Gramm",
            "different_sorts": "yes",
        },
        "promotion": {
            "price": 0.99,
            "regular_price": 1.87,
            "relative_discount": 47,
            "absolute_discount": "NaN",
        },
        "description": "Lorenz Saltletts Sticks oder Brezel",
    },
    {
        "label": "barilla-pastasauce-400g",
        "product": {
            "brand": "Barilla",
            "product_category": ["Nudelsauce", "Pasta Sauce", "Pastasauce", "Pasta-Sauce"],
            "GTINs": [with_check_digit("0807680951372"), with_check_digit("0807680951389")],
            "weight_number": 400.0,
            "weight_unit": "Gramm",
            "different_sorts": "yes",
        },
        "promotion": {
            "price": 1.79,
            "regular_price": 2.99,
            "relative_discount": 40,
            "absolute_discount": "NaN",
        },
        "description": "Barilla Pastasauce Basilico oder Arrabbiata",
    },
    {
        "label": "loreal-men-expert-50ml",
        "product": {
            "brand": "LOreal",
            "product_category": ["Gesichtspflege", "Men Expert"],
            "GTINs": [with_check_digit("0360052265432")],
            "weight_number": 50.0,
            "weight_unit": "Milliliter",
            "different_sorts": "no",
        },
        "promotion": {
            "price": 4.95,
            "regular_price": "NaN",
            "relative_discount": "NaN",
            "absolute_discount": 2.0,
        },
        "description": "L'Oreal Men Expert Hydra Energy Feuchtigkeitspflege",
    },
    {
        "label": "persil-waschmittel-135kg",
        "product": {
            "brand": "Persil",
            "product_category": ["Waschmittel"],
            "GTINs": [with_check_digit("0401584358821")],
            "weight_number": 1.35,
            "weight_unit": "Kilogramm",
            "different_sorts": "NaN",
        },
        "promotion": {
            "price": 5.55,
            "regular_price": "NaN",
            "relative_discount": "NaN",
            "absolute_discount": "NaN",
        },
        "description": "Persil Universal Pulver 20 Waschladungen",
    },
]


@dataclass(frozen=True)
class FixturePaths:
    root: Path
    manifest: Path
    script: Path
    config: Path
    snapshot: Path
    traces: Path


def draw_advertisement(colour: tuple[int, int, int]) -> Image.Image:
    """Solid product colour inside a thin white frame."""
    image = Image.new("RGB", (IMAGE_SIZE, IMAGE_SIZE), "white")
    ImageDraw.Draw(image).rectangle(
        (FRAME, FRAME, IMAGE_SIZE - FRAME - 1, IMAGE_SIZE - FRAME - 1), fill=colour
    )
    return image


def write_fixture(
    root: Path,
    n_classes: int = 4,
    n_train: int = 2,
    n_test: int = 1,
    descriptions: bool = False,
    null_above: Optional[int] = None,
) -> FixturePaths:
    """Write ``n_classes`` x (``n_train`` + ``n_test``) items under ``root``."""
    if not 1 <= n_classes <= len(CLASSES):
        raise ValueError(f"n_classes must be in 1..{len(CLASSES)}")
    root = Path(root).resolve()
    (root / "images").mkdir(parents=True, exist_ok=True)

    lines = []
    item_descriptions = {}
    for cls, colour in zip(CLASSES[:n_classes], CLASS_COLOURS):
        image = draw_advertisement(colour)
        splits = ["train"] * n_train + ["test"] * n_test
        for i, split in enumerate(splits, start=1):
            item_id = f"{cls['label']}-{i}"
            image.save(root / "images" / f"{item_id}.png")
            lines.append(
                json.dumps(
                    {
                        "item_id": item_id,
                        "image_path": f"images/{item_id}.png",
                        "split": split,
                        "label": cls["label"],
                        "product": cls["product"],
                        "promotion": cls["promotion"],
                    },
                    ensure_ascii=False,
                )
            )
            item_descriptions[item_id] = cls["description"]

    paths = FixturePaths(
        root=root,
        manifest=root / "manifest.jsonl",
        script=root / "mock_vlm.json",
        config=root / "run.json",
        snapshot=root / "store.bin",
        traces=root / "traces.jsonl",
    )
    paths.manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")

    script: dict[str, Any] = {"echo_first_sample": True}
    if descriptions:
        script["descriptions"] = item_descriptions
    if null_above is not None:
        script["null_above_samples"] = null_above
    paths.script.write_text(json.dumps(script, indent=2, ensure_ascii=False), encoding="utf-8")

    config = {
        "manifest": str(paths.manifest),
        "snapshot": str(paths.snapshot),
        "traces": str(paths.traces),
        "vlm": {"kind": "mock", "script": str(paths.script)},
        "workers": 2,
        "prices": {"input": 0.15e-6, "output": 0.60e-6},
        "run_name": "fixture",
    }
    paths.config.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return paths


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("root", type=Path)
    parser.add_argument("--classes", type=int, default=4)
    parser.add_argument("--train", type=int, default=2)
    parser.add_argument("--test", type=int, default=1)
    parser.add_argument("--descriptions", action="store_true")
    parser.add_argument("--null-above", type=int, default=None)
    args = parser.parse_args()
    paths = write_fixture(
        args.root, args.classes, args.train, args.test, args.descriptions, args.null_above
    )
    print(f"Wrote fixture manifest: {paths.manifest}")
    print(f"Wrote run config: {paths.config}")


if __name__ == "__main__":
    main()
