"""Relation identifiers and per-cell verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ValidationError

FAMILIES = ("svm", "cnn")
STATUSES = ("pass", "killed", "inconclusive")


@dataclass(frozen=True)
class MrId:
    """A metamorphic relation: family plus index 1..4.

    svm-1 permutes features, svm-2 reorders training rows, svm-3 shifts
    every feature by a constant (RBF only), svm-4 checks the linear
    decision identity on scaled test inputs (linear only, no retraining).
    cnn-1 permutes channels, cnn-2 applies dihedral transforms (both
    retrain per variant); cnn-3 feeds pre-standardized and cnn-4
    constant-scaled test inputs to a trained model.
    """

    family: str
    index: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown MR family {self.family!r}")
        if not 1 <= self.index <= 4:
            raise ValidationError(f"MR index must be 1..4, got {self.index}")

    def __str__(self):
        return f"{self.family}-{self.index}"

    @classmethod
    def parse(cls, text):
        try:
            family, index = text.split("-")
            return cls(family=family, index=int(index))
        except (ValueError, AttributeError) as exc:
            raise ValidationError(f"cannot parse MR id {text!r}") from exc


SVM_MRS = tuple(MrId("svm", i) for i in range(1, 5))
CNN_MRS = tuple(MrId("cnn", i) for i in range(1, 5))


@dataclass
class MrVerdict:
    """Outcome of one relation against one subject."""

    mr: MrId
    status: str
    evidence: float = 0.0      # max deviation or max per-step spread
    threshold: float = 0.0
    detail: str = ""
    variants: dict = field(default_factory=dict)  # variant name -> evidence

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"unknown verdict status {self.status!r}")

    @property
    def killed(self):
        return self.status == "killed"

    def to_dict(self):
        return {
            "mr": str(self.mr),
            "status": self.status,
            "evidence": _num(self.evidence),
            "threshold": _num(self.threshold),
            "detail": self.detail,
            "variants": {k: _num(v) for k, v in self.variants.items()},
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            mr=MrId.parse(doc["mr"]),
            status=doc["status"],
            evidence=_unnum(doc["evidence"]),
            threshold=_unnum(doc["threshold"]),
            detail=doc.get("detail", ""),
            variants={k: _unnum(v) for k, v in doc.get("variants", {}).items()},
        )


def _num(v):
    # JSON has no inf/nan literals
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return v


def _unnum(v):
    if isinstance(v, str):
        return float(v)
    return float(v)
