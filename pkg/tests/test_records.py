import json
from decimal import Decimal

import pytest

from app.db.enums import DifferentSorts
from app.domain import (
    Prediction,
    ProductRecord,
    PromotionRecord,
    Weight,
    normalize_gtin,
    parse_prediction,
    prediction_json_schema,
)
from app.errors import SchemaError

STRUCTURED_OUTPUT = """brand='Lorenz'
price=0.99
regular_price=1.87
relative_discount=47
absolute_discount=None
product_category=['Saltletts Sticks']
GTINs=['04018077683015',
       '04018077686719']
weight_number=250.0
weight_unit=Gramm
different_sorts=yes"""


def test_promotion_missing_values_stay_absent():
    promotion = PromotionRecord.model_validate(
        {"price": 0.99, "regular_price": "NaN", "relative_discount": float("nan")}
    )
    assert promotion.price == Decimal("0.99")
    assert promotion.regular_price is None
    assert promotion.relative_discount is None
    assert promotion.absolute_discount is None


def test_prices_are_exact_decimals():
    assert PromotionRecord(price=1.99).price != Decimal("1.990000001")
    assert PromotionRecord(price="1,99").price == Decimal("1.99")


@pytest.mark.parametrize("bad", [{"price": -1}, {"price": "abc"}, {"relative_discount": 4.5}])
def test_promotion_rejects_invalid(bad):
    with pytest.raises(ValueError):
        PromotionRecord.model_validate(bad)


def test_product_record_from_manifest_shape():
    product = ProductRecord.model_validate(
        {
            "brand": "Lorenz",
            "product_category": ["Salzgebäck"],
            "GTINs": ["4018077683015"],
            "weight_number": 175.0,
            "weight_unit": "gramm",
            "different_sorts": "maybe",
        }
    )
    assert product.gtins == [normalize_gtin("04018077683015")]
    assert product.weight == Weight(number=Decimal("175.0"), unit="Gramm")
    assert product.different_sorts == DifferentSorts.UNKNOWN

    dumped = product.model_dump(mode="json", by_alias=True)
    assert dumped["GTINs"] == ["04018077683015"]
    assert dumped["weight_number"] == 175.0
    assert dumped["weight_unit"] == "Gramm"


def test_product_record_rejects_empty_category():
    with pytest.raises(ValueError):
        ProductRecord.model_validate({"product_category": ["ok", " "]})


def test_parse_structured_output_listing():
    prediction = parse_prediction(STRUCTURED_OUTPUT)
    assert prediction.brand == "Lorenz"
    assert prediction.price == Decimal("0.99")
    assert prediction.regular_price == Decimal("1.87")
    assert prediction.relative_discount == 47
    assert prediction.absolute_discount is None
    assert prediction.product_category == ["Saltletts Sticks"]
    assert [g.digits for g in prediction.gtins] == ["04018077683015", "04018077686719"]
    assert prediction.weight == Weight(number=Decimal("250.0"), unit="Gramm")
    assert prediction.different_sorts == DifferentSorts.YES


def test_parse_json_string_with_fences():
    text = "```json\n" + json.dumps({"brand": "Barilla", "GTINs": [], "extra": 1}) + "\n```"
    prediction = parse_prediction(text)
    assert prediction.brand == "Barilla"
    assert prediction.gtins == []


@pytest.mark.parametrize(
    "payload",
    ["not a prediction", "{broken", ["brand"], {"price": "free"}, {"GTINs": ["12ab"]}],
)
def test_parse_rejects(payload):
    with pytest.raises(SchemaError):
        parse_prediction(payload)


def test_all_null():
    assert Prediction().is_all_null
    assert parse_prediction({field: None for field in ("brand", "price", "GTINs")}).is_all_null
    assert not Prediction(product_category=["Waschmittel"]).is_all_null
    assert not Prediction(different_sorts="no").is_all_null


def test_wire_form_round_trips():
    prediction = parse_prediction(STRUCTURED_OUTPUT)
    wire = prediction.to_wire()
    assert list(wire)[6] == "GTINs"
    assert parse_prediction(json.dumps(wire)) == prediction


def test_records_mapping_is_lossless():
    product = ProductRecord(
        brand="Persil",
        product_category=["Waschmittel"],
        gtins=["4015843588210"],
        weight=Weight(number="1.35", unit="Kilogramm"),
        different_sorts="no",
    )
    promotion = PromotionRecord(price="5.55", absolute_discount="1.00")
    assert Prediction.from_records(product, promotion).to_records() == (product, promotion)


def test_json_schema_uses_wire_names():
    schema = prediction_json_schema()
    assert "GTINs" in schema["properties"]
    assert "gtins" not in schema["properties"]
    assert schema["properties"]["GTINs"]["items"]["type"] == "string"
