"""Rating aggregation and the two publication gates.

Everything here is a pure function of its arguments.  Ratings live on a 0-5
scale, credibilities and the combined score on 0-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .errors import EmptyPanel, InvalidRating, InvalidWeights, NoValidators

MAX_RATING = 5.0
# an analyzer rating at or above this counts as a "real" verdict
REAL_VERDICT_THRESHOLD = 2.5


class Truth(str, Enum):
    FAKE = "Fake"
    AUTHENTIC = "Authentic"


class AnalysisGate(str, Enum):
    PROCEED = "ProceedToValidation"
    REJECTED = "RejectedFakeSuspect"


class PublicationGate(str, Enum):
    PUBLISHED = "Published"
    REJECTED = "RejectedFake"


def is_real_verdict(rating: float) -> bool:
    return rating >= REAL_VERDICT_THRESHOLD


def _check_rating(value: float, name: str = "lambda") -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= MAX_RATING):
        raise InvalidRating(f"{name}={value!r} outside [0, 5]")


def _check_unit(value: float, name: str) -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise InvalidRating(f"{name}={value!r} outside [0, 1]")


@dataclass(frozen=True)
class RatingRecord:
    actor_id: str
    lam: float
    credibility_snapshot: float
    article_id: str

    def __post_init__(self):
        _check_rating(self.lam)
        _check_unit(self.credibility_snapshot, "credibility_snapshot")


@dataclass(frozen=True)
class ValidationTally:
    eta: int
    eta_b: int
    per_analyzer_agreement: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.eta < 1:
            raise NoValidators("a tally needs at least one validator")
        if not 0 <= self.eta_b <= self.eta:
            raise ValueError(f"eta_b={self.eta_b} outside [0, {self.eta}]")
        for aid, eta_a in self.per_analyzer_agreement.items():
            if not 0 <= eta_a <= self.eta:
                raise ValueError(f"agreement for {aid}={eta_a} outside [0, {self.eta}]")

    def agreement_ratio(self, analyzer_id: str) -> float:
        return self.per_analyzer_agreement[analyzer_id] / self.eta


@dataclass(frozen=True)
class ScoringParams:
    omega1: float = 0.1
    omega2: float = 0.5
    omega3: float = 0.4
    theta: float = 1.0
    gate_analyzer: float = 0.5
    gate_total: float = 0.5

    def __post_init__(self):
        weights = (self.omega1, self.omega2, self.omega3)
        if any(w < 0 or not math.isfinite(w) for w in weights):
            raise InvalidWeights(f"weights must be non-negative: {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise InvalidWeights(f"weights must sum to 1, got {sum(weights)!r}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")
        for name in ("gate_analyzer", "gate_total"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def reporter_rating(record: RatingRecord) -> float:
    """Reporter's self-rating discounted by their credibility."""
    return record.lam * record.credibility_snapshot


def analyzer_rating(records: Sequence[RatingRecord]) -> float:
    """Mean credibility-weighted rating over the analyzer panel."""
    if not records:
        raise EmptyPanel("analyzer panel is empty")
    return math.fsum(r.credibility_snapshot * r.lam for r in records) / len(records)


def validator_belief(tally: ValidationTally) -> float:
    if tally.eta < 1:
        raise NoValidators("no validators")
    return tally.eta_b / tally.eta * MAX_RATING


def total_score(r: float, a: float, v: float, params: ScoringParams) -> float:
    for name, value in (("R", r), ("A", a), ("V", v)):
        _check_rating(value, name)
    weights = (params.omega1, params.omega2, params.omega3)
    if abs(sum(weights) - 1.0) > 1e-12 or min(weights) < 0:
        raise InvalidWeights(f"invalid weights {weights}")
    # Written as an offset from v so that r == a == v returns v/5 exactly; this
    # equals the plain weighted sum because the weights sum to one.
    score = (v + params.omega1 * (r - v) + params.omega2 * (a - v)) / MAX_RATING
    return min(1.0, max(0.0, score))


def gate_after_analysis(a: float, params: ScoringParams) -> AnalysisGate:
    if a / MAX_RATING >= params.gate_analyzer:
        return AnalysisGate.PROCEED
    return AnalysisGate.REJECTED


def gate_after_validation(s_total: float, params: ScoringParams) -> PublicationGate:
    if s_total >= params.gate_total:
        return PublicationGate.PUBLISHED
    return PublicationGate.REJECTED
