"""Product and promotion records, and the structured prediction schema.

Missing values are the dataset's "NaN" and are kept as None, never as 0.
Prices are decimals so equality is exact.
"""

import ast
import json
import math
import re
from decimal import Decimal, InvalidOperation
from typing import Annotated, Any, Optional, Self

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    ValidationError,
    field_validator,
    model_serializer,
    model_validator,
)

from app.db.enums import DifferentSorts, WeightUnit
from app.domain.gtin import Gtin
from app.errors import SchemaError

_MISSING_STRINGS = {"", "nan", "none", "null"}


def _is_missing(value: Any) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and value.strip().lower() in _MISSING_STRINGS


def _to_decimal(value: Any) -> Optional[Decimal]:
    if _is_missing(value):
        return None
    if isinstance(value, bool):
        raise ValueError("boolean is not a number")
    try:
        if isinstance(value, float):
            # repr gives the shortest round-tripping form, 0.99 stays 0.99
            number = Decimal(repr(value))
        elif isinstance(value, (int, Decimal)):
            number = Decimal(value)
        elif isinstance(value, str):
            number = Decimal(value.strip().replace(",", "."))
        else:
            raise ValueError(f"not a number: {value!r}")
    except InvalidOperation as e:
        raise ValueError(f"not a number: {value!r}") from e
    if not number.is_finite():
        raise ValueError(f"not finite: {value!r}")
    if number < 0:
        raise ValueError(f"must be >= 0, got {value!r}")
    return number


def _to_count(value: Any) -> Optional[int]:
    number = _to_decimal(value)
    if number is None:
        return None
    if number != number.to_integral_value():
        raise ValueError(f"expected a whole number, got {value!r}")
    return int(number)


def _to_gtins(value: Any) -> list[Gtin]:
    if _is_missing(value):
        return []
    if isinstance(value, (str, int, Gtin)):
        value = [value]
    if not isinstance(value, (list, tuple, set)):
        raise ValueError(f"GTINs must be a list, got {type(value).__name__}")
    return [
        item if isinstance(item, Gtin) else Gtin.model_validate(str(item))
        for item in value
    ]


def _to_categories(value: Any) -> list[str]:
    if _is_missing(value):
        return []
    if isinstance(value, str):
        value = [value]
    categories = []
    for entry in value:
        if not isinstance(entry, str) or not entry.strip():
            raise ValueError(f"product category entries must be non-empty, got {entry!r}")
        categories.append(entry.strip())
    return categories


def _decimal_json(value: Optional[Decimal]) -> Optional[float]:
    return None if value is None else float(value)


def canonical_unit(raw: Any) -> Optional[str]:
    """Case-normalize a weight unit; unknown units keep their spelling."""
    if _is_missing(raw):
        return None
    text = str(raw).strip()
    folded = text.casefold().replace("ü", "ue")
    for unit in WeightUnit:
        if unit.value.casefold() == folded:
            return unit.value
    return text[:1].upper() + text[1:].lower()


def canonical_sorts(raw: Any) -> Optional[DifferentSorts]:
    if _is_missing(raw):
        return None
    if isinstance(raw, bool):
        return DifferentSorts.YES if raw else DifferentSorts.NO
    text = str(raw).strip().lower()
    if text in (DifferentSorts.YES, DifferentSorts.NO):
        return DifferentSorts(text)
    return DifferentSorts.UNKNOWN


Amount = Annotated[
    Optional[Decimal],
    BeforeValidator(_to_decimal),
    PlainSerializer(_decimal_json, when_used="json"),
    WithJsonSchema({"anyOf": [{"type": "number", "minimum": 0}, {"type": "null"}]}),
]
Count = Annotated[Optional[int], BeforeValidator(_to_count)]
GtinList = Annotated[
    list[Gtin],
    BeforeValidator(_to_gtins),
    PlainSerializer(lambda gtins: [g.digits for g in gtins], when_used="always"),
    WithJsonSchema({"type": "array", "items": {"type": "string", "pattern": "^[0-9]{1,14}$"}}),
]
Categories = Annotated[list[str], BeforeValidator(_to_categories)]
Unit = Annotated[Optional[str], BeforeValidator(canonical_unit)]
Sorts = Annotated[Optional[DifferentSorts], BeforeValidator(canonical_sorts)]


class Weight(BaseModel):
    """Product weight, e.g. 175.0 Gramm."""

    model_config = ConfigDict(frozen=True)

    number: Annotated[Decimal, BeforeValidator(_to_decimal)]
    unit: Annotated[str, BeforeValidator(canonical_unit)]

    def __str__(self) -> str:
        return f"{self.number} {self.unit}"


class ProductRecord(BaseModel):
    """Ground-truth product data of one advertisement."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    brand: Optional[str] = None
    product_category: Categories = Field(default_factory=list)
    gtins: GtinList = Field(default_factory=list, alias="GTINs")
    weight: Optional[Weight] = None
    different_sorts: DifferentSorts = DifferentSorts.UNKNOWN

    @model_validator(mode="before")
    @classmethod
    def unflatten_weight(cls, data: Any) -> Any:
        """The manifest stores weight as flat weight_number / weight_unit."""
        if not isinstance(data, dict) or "weight" in data:
            return data
        data = dict(data)
        number = data.pop("weight_number", None)
        unit = data.pop("weight_unit", None)
        if not _is_missing(number) and not _is_missing(unit):
            data["weight"] = {"number": number, "unit": unit}
        return data

    @field_validator("brand", mode="before")
    @classmethod
    def missing_brand(cls, value: Any) -> Any:
        return None if _is_missing(value) else str(value).strip()

    @field_validator("different_sorts", mode="before")
    @classmethod
    def sorts(cls, value: Any) -> DifferentSorts:
        return canonical_sorts(value) or DifferentSorts.UNKNOWN

    @model_serializer(mode="wrap")
    def flatten_weight(self, handler) -> dict[str, Any]:
        data = handler(self)
        weight = data.pop("weight", None)
        data["weight_number"] = None
        data["weight_unit"] = None
        if weight is not None:
            data["weight_number"] = _decimal_json(self.weight.number)
            data["weight_unit"] = self.weight.unit
        return data


class PromotionRecord(BaseModel):
    """Ground-truth promotion data of one advertisement."""

    model_config = ConfigDict(frozen=True)

    price: Amount = None
    regular_price: Amount = None
    relative_discount: Count = None
    absolute_discount: Amount = None


PREDICTION_FIELDS = (
    "brand",
    "price",
    "regular_price",
    "relative_discount",
    "absolute_discount",
    "product_category",
    "GTINs",
    "weight_number",
    "weight_unit",
    "different_sorts",
)


class Prediction(BaseModel):
    """Structured VLM output, one attribute per target."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="ignore")

    brand: Optional[str] = None
    price: Amount = None
    regular_price: Amount = None
    relative_discount: Count = None
    absolute_discount: Amount = None
    product_category: Categories = Field(default_factory=list)
    gtins: GtinList = Field(default_factory=list, alias="GTINs")
    weight_number: Amount = None
    weight_unit: Unit = None
    different_sorts: Sorts = None

    @field_validator("brand", mode="before")
    @classmethod
    def missing_brand(cls, value: Any) -> Any:
        return None if _is_missing(value) else str(value).strip()

    @property
    def is_all_null(self) -> bool:
        """Every scalar absent and both lists empty."""
        return (
            self.brand is None
            and self.price is None
            and self.regular_price is None
            and self.relative_discount is None
            and self.absolute_discount is None
            and not self.product_category
            and not self.gtins
            and self.weight_number is None
            and self.weight_unit is None
            and self.different_sorts is None
        )

    @property
    def weight(self) -> Optional[Weight]:
        if self.weight_number is None or self.weight_unit is None:
            return None
        return Weight(number=self.weight_number, unit=self.weight_unit)

    def to_wire(self) -> dict[str, Any]:
        """JSON object with the structured-output field names."""
        return self.model_dump(mode="json", by_alias=True)

    @classmethod
    def from_records(cls, product: ProductRecord, promotion: PromotionRecord) -> Self:
        return cls(
            brand=product.brand,
            price=promotion.price,
            regular_price=promotion.regular_price,
            relative_discount=promotion.relative_discount,
            absolute_discount=promotion.absolute_discount,
            product_category=product.product_category,
            gtins=product.gtins,
            weight_number=product.weight.number if product.weight else None,
            weight_unit=product.weight.unit if product.weight else None,
            different_sorts=product.different_sorts,
        )

    def to_records(self) -> tuple[ProductRecord, PromotionRecord]:
        product = ProductRecord(
            brand=self.brand,
            product_category=self.product_category,
            gtins=self.gtins,
            weight=self.weight,
            different_sorts=self.different_sorts or DifferentSorts.UNKNOWN,
        )
        promotion = PromotionRecord(
            price=self.price,
            regular_price=self.regular_price,
            relative_discount=self.relative_discount,
            absolute_discount=self.absolute_discount,
        )
        return product, promotion


def prediction_json_schema() -> dict[str, Any]:
    """Schema descriptor sent with structured-output requests."""
    return Prediction.model_json_schema(by_alias=True)


_LISTING_KEY = re.compile(
    r"(?:^|\s)(" + "|".join(map(re.escape, PREDICTION_FIELDS)) + r")=", re.MULTILINE
)
_FENCE = re.compile(r"^```(?:json)?\s*|\s*```$")


def _parse_listing(text: str) -> dict[str, Any]:
    """Read the ``name=value`` listing printed for a structured output."""
    matches = list(_LISTING_KEY.finditer(text))
    if not matches:
        raise SchemaError("response holds neither JSON nor a field listing")
    fields: dict[str, Any] = {}
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        raw = text[match.end() : end].strip()
        try:
            fields[match.group(1)] = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            # Bare enum values, e.g. weight_unit=Gramm
            fields[match.group(1)] = raw
    return fields


def parse_prediction(payload: dict[str, Any] | str) -> Prediction:
    """Parse a model response into a Prediction, raising SchemaError."""
    if isinstance(payload, str):
        text = _FENCE.sub("", payload.strip())
        if text.startswith("{"):
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as e:
                raise SchemaError(f"invalid JSON response: {e}") from e
        else:
            payload = _parse_listing(text)
    if not isinstance(payload, dict):
        raise SchemaError(f"expected an object, got {type(payload).__name__}")
    try:
        return Prediction.model_validate(payload)
    except ValidationError as e:
        raise SchemaError(f"response does not match the schema: {e}") from e
