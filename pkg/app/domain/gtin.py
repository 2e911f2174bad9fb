"""GS1 Global Trade Item Numbers.

Dataset values come in 8 to 14 digit forms ("24000952"), so every GTIN is
zero-padded on the left to 14 digits before it is compared. A wrong check
digit is kept as a diagnostic and never rejected.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, model_validator

from app.errors import InvalidGtin

GTIN_LENGTH = 14


def gtin_check_digit(first13: str) -> int:
    """Return the GS1 mod-10 check digit for 13 leading digits.

    Weights alternate 3, 1, 3, ... from the left.

    Example:
        >>> gtin_check_digit("0401807768301")
        5
    """
    if len(first13) != GTIN_LENGTH - 1 or not first13.isascii() or not first13.isdigit():
        raise InvalidGtin(f"expected 13 digits, got {first13!r}")
    total = sum(int(d) * (3 if i % 2 == 0 else 1) for i, d in enumerate(first13))
    return (10 - total % 10) % 10


def _normalize_digits(raw: str) -> str:
    digits = raw.strip()
    if not digits or not digits.isascii() or not digits.isdigit():
        raise InvalidGtin(f"GTIN must be decimal digits, got {raw!r}")
    if len(digits) > GTIN_LENGTH:
        raise InvalidGtin(f"GTIN longer than {GTIN_LENGTH} digits: {raw!r}")
    return digits.zfill(GTIN_LENGTH)


class Gtin(BaseModel):
    """A normalized 14-digit GTIN.

    Two Gtins are equal iff their normalized digits are equal; check_ok is
    derived from the digits and never taken from input.
    """

    model_config = ConfigDict(frozen=True)

    digits: str
    check_ok: bool = False

    @model_validator(mode="before")
    @classmethod
    def normalize(cls, data: Any) -> Any:
        if isinstance(data, Gtin):
            return data
        raw = data.get("digits") if isinstance(data, dict) else data
        if not isinstance(raw, str):
            raise ValueError(f"GTIN must be a string, got {type(raw).__name__}")
        try:
            digits = _normalize_digits(raw)
        except InvalidGtin as e:
            # pydantic reports ValueError as a validation error
            raise ValueError(str(e)) from e
        return {
            "digits": digits,
            "check_ok": gtin_check_digit(digits[:-1]) == int(digits[-1]),
        }

    def __str__(self) -> str:
        return self.digits

    def __lt__(self, other: "Gtin") -> bool:
        return self.digits < other.digits


def normalize_gtin(raw: str | Gtin) -> Gtin:
    """Parse a raw GTIN string into a Gtin, raising InvalidGtin."""
    if isinstance(raw, Gtin):
        return raw
    if not isinstance(raw, str):
        raise InvalidGtin(f"GTIN must be a string, got {type(raw).__name__}")
    digits = _normalize_digits(raw)
    return Gtin.model_validate(digits)
