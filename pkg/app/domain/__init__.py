"""Value types shared by every pipeline stage."""

from app.domain.gtin import Gtin, gtin_check_digit, normalize_gtin
from app.domain.records import (
    PREDICTION_FIELDS,
    Prediction,
    ProductRecord,
    PromotionRecord,
    Weight,
    parse_prediction,
    prediction_json_schema,
)

__all__ = [
    "PREDICTION_FIELDS",
    "Gtin",
    "Prediction",
    "ProductRecord",
    "PromotionRecord",
    "Weight",
    "gtin_check_digit",
    "normalize_gtin",
    "parse_prediction",
    "prediction_json_schema",
]
