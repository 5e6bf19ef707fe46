"""Simulated participant behavior.

These are the only places outside resolution that look at an article's
latent truth: they stand in for the private judgement of real people.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from ..classifier.model import TrainedModel, classify_and_rate
from ..scoring import Truth
from .config import AnalyzerCohort, ReporterCohort, ValidatorCohort


def derive_rng(seed: int, label: str) -> random.Random:
    """Independent generator for one purpose, derived from the scenario seed."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "little"))


@dataclass
class ReporterAgent:
    cohort: ReporterCohort
    rng: random.Random

    def next_story(self) -> tuple[Truth, float]:
        truth = Truth.FAKE if self.rng.random() < self.cohort.p_fake else Truth.AUTHENTIC
        lam = self.rng.uniform(self.cohort.lambda_low, self.cohort.lambda_high)
        return truth, lam


def directional_rating(says_real: bool, noise: float, rng: random.Random) -> float:
    offset = noise * rng.random()
    return 5.0 - offset if says_real else offset


@dataclass
class HumanAnalyzer:
    cohort: AnalyzerCohort
    rng: random.Random

    def rate(self, article) -> float:
        if self.cohort.behavior == "colluding" and article.truth is Truth.FAKE:
            return 5.0
        correct = self.rng.random() < self.cohort.accuracy
        says_real = (article.truth is Truth.AUTHENTIC) == correct
        return directional_rating(says_real, self.cohort.noise, self.rng)


@dataclass
class MachineAnalyzer:
    """Rates with the trained classifier; before training it cannot rate."""

    model: TrainedModel | None = None
    # single-class history: fall back to that class's verdict
    constant_p_real: float | None = None
    last_p_real: dict[str, float] = field(default_factory=dict)

    def rate(self, article) -> float:
        if self.model is not None:
            p, lam = classify_and_rate(self.model, article)
        elif self.constant_p_real is not None:
            p = self.constant_p_real
            lam = 0.0 if p < 0.5 else 5.0 * p
        else:
            raise RuntimeError("machine analyzer has no model yet")
        self.last_p_real[article.article_id] = p
        return lam


@dataclass
class ValidatorAgent:
    cohort: ValidatorCohort
    rng: random.Random

    def believes(self, article) -> bool:
        p = self.cohort.p_believe_authentic if article.truth is Truth.AUTHENTIC else self.cohort.p_believe_fake
        return self.rng.random() < p
