"""Synthetic labeled news text.

Fake articles carry emotive marker words and headlines that drift away from
the body; authentic ones carry neutral reporting markers and headlines drawn
from the body itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..classifier.model import LabeledText
from ..scoring import Truth
from .config import CorpusSpec


@dataclass(frozen=True)
class SyntheticArticle:
    truth: Truth
    title: str
    body: str
    area: str
    domain: str

    def labeled(self) -> LabeledText:
        return LabeledText("fake" if self.truth is Truth.FAKE else "real", self.title, self.body)


def generate_article(spec: CorpusSpec, truth: Truth, rng: random.Random) -> SyntheticArticle:
    area = rng.choice(spec.areas)
    domain = rng.choice(spec.domains)
    topic = spec.topics[domain]
    own, other = (
        (spec.fake_markers, spec.authentic_markers)
        if truth is Truth.FAKE
        else (spec.authentic_markers, spec.fake_markers)
    )
    words = [rng.choice(topic) for _ in range(spec.body_length)]
    markers = [rng.choice(other if rng.random() < spec.marker_noise else own) for _ in range(spec.marker_count)]
    body_words = words + markers + list(spec.filler) + [area]
    rng.shuffle(body_words)

    if truth is Truth.FAKE:
        every_topic = sorted({w for ws in spec.topics.values() for w in ws})
        title_words = [rng.choice(spec.fake_markers) for _ in range(2)]
        title_words += [rng.choice(every_topic) for _ in range(max(spec.title_length - 2, 0))]
    else:
        title_words = [rng.choice(words) for _ in range(spec.title_length)] if words else []
    return SyntheticArticle(truth, " ".join(title_words).capitalize(), " ".join(body_words) + ".", area, domain)


def generate_corpus(spec: CorpusSpec, n: int, fake_fraction: float, rng: random.Random) -> list[SyntheticArticle]:
    """Exactly ``round(n * fake_fraction)`` fake articles, in shuffled order."""
    spec.validate()
    n_fake = round(n * fake_fraction)
    truths = [Truth.FAKE] * n_fake + [Truth.AUTHENTIC] * (n - n_fake)
    rng.shuffle(truths)
    return [generate_article(spec, t, rng) for t in truths]
