from enum import Enum, IntEnum, StrEnum


class HTTPStatus(IntEnum):
    """All HTTP status codes used in endpoints."""

    # Success
    OK = 200

    # Client Error
    BAD_REQUEST = 400
    NOT_FOUND = 404
    UNPROCESSABLE_ENTITY = 422

    # Server Error
    INTERNAL_SERVER_ERROR = 500
    BAD_GATEWAY = 502
    SERVICE_UNAVAILABLE = 503


class Split(StrEnum, Enum):
    """Dataset partition of an item."""

    TRAIN = "train"
    TEST = "test"


class Modality(StrEnum, Enum):
    """What an embedding was computed from."""

    IMAGE = "image"
    TEXT = "text"


class DifferentSorts(StrEnum, Enum):
    """Whether an advertisement covers several sorts of the product.

    The dataset only knows yes/no, anything else is UNKNOWN.
    """

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class WeightUnit(StrEnum, Enum):
    """Units printed in the dataset's product weight."""

    GRAMM = "Gramm"
    KILOGRAMM = "Kilogramm"
    MILLILITER = "Milliliter"
    LITER = "Liter"
    STUECK = "Stueck"


class DecidedBy(StrEnum, Enum):
    """Which rule settled a classification.

    - MAJORITY = unique most frequent label among the hits
    - IMAGE_TIEBREAK = tie, settled by the nearest image hit of a tied label
    - OVERALL_NEAREST_FALLBACK = tie without any image hit of a tied label
    """

    MAJORITY = "majority"
    IMAGE_TIEBREAK = "image_tiebreak"
    OVERALL_NEAREST_FALLBACK = "overall_nearest_fallback"


class MatchRule(StrEnum, Enum):
    """How a predicted target is compared to ground truth."""

    SUBSTRING = "substring"
    EXACT = "exact"
    GTIN_EXACT_SET = "gtin_exact_set"
    GTIN_UNION_MEMBERSHIP = "gtin_union_membership"
    GTIN_ANY_MATCH = "gtin_any_match"


class GtinMetric(StrEnum, Enum):
    """GTIN rule selectable for a run."""

    EXACT_SET = "exact_set"
    UNION = "union"
    ANY = "any"

    @property
    def rule(self) -> MatchRule:
        return {
            GtinMetric.EXACT_SET: MatchRule.GTIN_EXACT_SET,
            GtinMetric.UNION: MatchRule.GTIN_UNION_MEMBERSHIP,
            GtinMetric.ANY: MatchRule.GTIN_ANY_MATCH,
        }[self]


class EmbedderKind(StrEnum, Enum):
    REFERENCE = "reference"
    REMOTE = "remote"


class SegmenterKind(StrEnum, Enum):
    STUB = "stub"
    REMOTE = "remote"


class VlmKind(StrEnum, Enum):
    MOCK = "mock"
    REMOTE = "remote"
