"""The 13-criterion quality rubric, its ordinal encodings, and helpfulness
classification of crowd notes.

Every criterion's category order is fixed here so distance-weighted
agreement statistics are well-defined; forms and loaders validate against
this schema, never against ad-hoc strings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Optional

from ..models import format_timestamp, parse_timestamp


class ValidationError(ValueError):
    """An annotation value outside its criterion's scale."""


class Kind(enum.Enum):
    CATEGORICAL = "categorical"  # ordered labels
    INT_SCALE = "int_scale"      # inclusive integer range
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class CriterionSpec:
    name: str
    kind: Kind
    categories: tuple[str, ...] = ()   # low-to-high order for CATEGORICAL
    low: int = 0
    high: int = 0
    per_reference: bool = False

    def validate(self, value: Any) -> Any:
        if self.kind is Kind.CATEGORICAL:
            if value not in self.categories:
                raise ValidationError(
                    f"{self.name}: {value!r} not in {list(self.categories)}"
                )
            return value
        if self.kind is Kind.INT_SCALE:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"{self.name}: {value!r} is not an integer")
            if not self.low <= value <= self.high:
                raise ValidationError(
                    f"{self.name}: {value} outside [{self.low}, {self.high}]"
                )
            return value
        if not isinstance(value, bool):
            raise ValidationError(f"{self.name}: {value!r} is not a boolean")
        return value

    def ordinal(self, value: Any) -> int:
        """Position on the criterion's ordered scale, for weighted kappa."""
        self.validate(value)
        if self.kind is Kind.CATEGORICAL:
            return self.categories.index(value)
        if self.kind is Kind.INT_SCALE:
            return value - self.low
        return int(value)

    @property
    def category_count(self) -> int:
        if self.kind is Kind.CATEGORICAL:
            return len(self.categories)
        if self.kind is Kind.INT_SCALE:
            return self.high - self.low + 1
        return 2

    def scale(self) -> tuple:
        """Every admissible value, lowest first. Feed this to weighted_kappa."""
        if self.kind is Kind.CATEGORICAL:
            return self.categories
        if self.kind is Kind.INT_SCALE:
            return tuple(range(self.low, self.high + 1))
        return (False, True)


_FIVE_POINT = {"kind": Kind.INT_SCALE, "low": 1, "high": 5}

CRITERIA: dict[str, CriterionSpec] = {
    spec.name: spec
    for spec in (
        CriterionSpec("explicitness", Kind.CATEGORICAL,
                      categories=("Unclear", "Implicit", "Explicit")),
        CriterionSpec("identification_existence", Kind.CATEGORICAL,
                      categories=("NoCorrect", "CorrectWithMistakes", "CorrectOnly")),
        CriterionSpec("identification_comprehensiveness", **_FIVE_POINT),
        CriterionSpec("explanation_accuracy", **_FIVE_POINT),
        CriterionSpec("explanation_informativeness", Kind.INT_SCALE, low=0, high=10),
        CriterionSpec("text_relevance", Kind.INT_SCALE, low=0, high=10),
        CriterionSpec("text_factuality", **_FIVE_POINT),
        CriterionSpec("text_fluency", Kind.CATEGORICAL,
                      categories=("Low", "Medium", "High")),
        CriterionSpec("text_coherence", Kind.CATEGORICAL,
                      categories=("Barely", "Partially", "Fully")),
        CriterionSpec("text_toxicity", Kind.BOOLEAN),
        CriterionSpec("reachability", Kind.BOOLEAN, per_reference=True),
        CriterionSpec("reference_relevance", Kind.BOOLEAN, per_reference=True),
        CriterionSpec("reference_credibility", Kind.CATEGORICAL,
                      categories=("Low", "Medium", "High", "VeryHigh"),
                      per_reference=True),
    )
}

OVERALL = CriterionSpec("overall", Kind.INT_SCALE, low=0, high=10)

RESPONSE_LEVEL_CRITERIA = tuple(n for n, s in CRITERIA.items() if not s.per_reference)
REFERENCE_LEVEL_CRITERIA = tuple(n for n, s in CRITERIA.items() if s.per_reference)

assert len(CRITERIA) == 13


def rubric_schema() -> dict:
    """JSON-safe schema document: criterion order, kinds, scales, and ordinal
    encodings.  Served to form frontends and embedded in exports."""
    out = {}
    for name, spec in list(CRITERIA.items()) + [("overall", OVERALL)]:
        entry: dict[str, Any] = {"kind": spec.kind.value, "per_reference": spec.per_reference}
        if spec.kind is Kind.CATEGORICAL:
            entry["categories"] = list(spec.categories)
        elif spec.kind is Kind.INT_SCALE:
            entry["low"] = spec.low
            entry["high"] = spec.high
        out[name] = entry
    return out


class Phase(enum.Enum):
    ONBOARDING = "onboarding"
    MAIN = "main"


@dataclass(frozen=True)
class AnnotationTask:
    """One post with its competing responses, assigned to one annotator or a
    pair.  Dual assignment halves each annotation's weight."""

    task_id: str
    post_id: str
    response_ids: tuple[str, ...]
    annotators: tuple[str, ...]
    phase: Phase = Phase.MAIN

    def __post_init__(self) -> None:
        if not 1 <= len(self.annotators) <= 2:
            raise ValueError("a task is assigned to one or two annotators")
        if not self.response_ids:
            raise ValueError("a task needs at least one response")

    @property
    def weight(self) -> float:
        return 0.5 if len(self.annotators) == 2 else 1.0

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "post_id": self.post_id,
            "response_ids": list(self.response_ids),
            "annotators": list(self.annotators),
            "phase": self.phase.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationTask":
        return cls(
            task_id=d["task_id"],
            post_id=d["post_id"],
            response_ids=tuple(d["response_ids"]),
            annotators=tuple(d["annotators"]),
            phase=Phase(d.get("phase", "main")),
        )


@dataclass(frozen=True)
class Annotation:
    """One annotator's completed rubric for one response of one task."""

    task_id: str
    annotator_id: str
    response_id: str
    values: dict[str, Any]                 # response-level criteria + overall
    references: tuple[dict[str, Any], ...] # one dict per reference link
    explanation: str
    weight: float = 1.0
    metadata: dict[str, str] = field(default_factory=dict)
    created_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        missing = [n for n in RESPONSE_LEVEL_CRITERIA if n not in self.values]
        if "overall" not in self.values:
            missing.append("overall")
        if missing:
            raise ValidationError(f"missing criteria: {missing}")
        for name, value in self.values.items():
            spec = OVERALL if name == "overall" else CRITERIA.get(name)
            if spec is None or spec.per_reference:
                raise ValidationError(f"unknown response-level criterion {name!r}")
            spec.validate(value)
        for ref in self.references:
            for name in REFERENCE_LEVEL_CRITERIA:
                if name not in ref:
                    raise ValidationError(f"reference entry missing {name!r}")
                CRITERIA[name].validate(ref[name])
        if not self.explanation.strip():
            raise ValidationError("explanation must be nonempty")
        if self.weight not in (0.5, 1.0):
            raise ValidationError("weight must be 0.5 (dual) or 1.0 (single)")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "response_id": self.response_id,
            "values": dict(self.values),
            "references": [dict(r) for r in self.references],
            "explanation": self.explanation,
            "weight": self.weight,
            "metadata": dict(self.metadata),
            "created_at": format_timestamp(self.created_at) if self.created_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Annotation":
        return cls(
            task_id=d["task_id"],
            annotator_id=d["annotator_id"],
            response_id=d["response_id"],
            values=dict(d["values"]),
            references=tuple(dict(r) for r in d.get("references", [])),
            explanation=d["explanation"],
            weight=d.get("weight", 1.0),
            metadata=dict(d.get("metadata", {})),
            created_at=parse_timestamp(d["created_at"]) if d.get("created_at") else None,
        )


class HelpfulnessClass(enum.Enum):
    HIGH = "high"
    AVERAGE = "average"
    NEITHER = "neither"


def classify_helpfulness(score: float) -> HelpfulnessClass:
    """Partition of the crowd-helpfulness score line.

    High at and above 0.35; Average on the half-open band [0.05, 0.25);
    everything else, including the (0.25, 0.35) gap, is Neither.
    """
    if score != score or score in (float("inf"), float("-inf")):
        raise ValueError(f"score must be finite, got {score}")
    if score >= 0.35:
        return HelpfulnessClass.HIGH
    if 0.05 <= score < 0.25:
        return HelpfulnessClass.AVERAGE
    return HelpfulnessClass.NEITHER
