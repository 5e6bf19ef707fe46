"""Scenario configuration: populations, behavior models and protocol parameters."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from ..classifier.model import DEFAULT_DIMS, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE
from ..classifier.text import DEFAULT_MAX_DF
from ..errors import ConfigError, OverlappingVocabularies
from ..lifecycle import DEFAULT_MAX_VALIDATORS
from ..participants import DEFAULT_GROWTH_RATE
from ..scoring import ScoringParams
from ..selection import PanelSpec


def _prob(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        raise ConfigError(f"{name} must be a probability, got {value!r}")


def _count(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ConfigError(f"{name} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class ReporterCohort:
    name: str
    count: int
    p_fake: float = 0.0
    lambda_low: float = 4.0
    lambda_high: float = 5.0

    def validate(self) -> None:
        _count(f"reporters[{self.name}].count", self.count)
        _prob(f"reporters[{self.name}].p_fake", self.p_fake)
        if not 0.0 <= self.lambda_low <= self.lambda_high <= 5.0:
            raise ConfigError(f"reporters[{self.name}]: need 0 <= lambda_low <= lambda_high <= 5")


@dataclass(frozen=True)
class AnalyzerCohort:
    """Human analyzers.  ``behavior`` is ``honest`` or ``colluding``."""

    name: str
    count: int
    behavior: str = "honest"
    accuracy: float = 0.9
    noise: float = 1.0

    def validate(self) -> None:
        _count(f"analyzers[{self.name}].count", self.count)
        _prob(f"analyzers[{self.name}].accuracy", self.accuracy)
        if self.behavior not in ("honest", "colluding"):
            raise ConfigError(f"analyzers[{self.name}].behavior must be honest or colluding")
        # noise beyond half the scale could flip the verdict direction
        if not 0.0 <= self.noise <= 2.5:
            raise ConfigError(f"analyzers[{self.name}].noise must lie in [0, 2.5]")


@dataclass(frozen=True)
class ValidatorCohort:
    name: str
    count: int
    p_believe_authentic: float = 0.8
    p_believe_fake: float = 0.2

    def validate(self) -> None:
        _count(f"validators[{self.name}].count", self.count)
        _prob(f"validators[{self.name}].p_believe_authentic", self.p_believe_authentic)
        _prob(f"validators[{self.name}].p_believe_fake", self.p_believe_fake)


DEFAULT_TOPICS = {
    "politics": ["election", "senate", "minister", "vote", "policy", "parliament", "campaign", "governor",
                 "coalition", "ballot", "legislation", "cabinet"],
    "economy": ["market", "inflation", "bank", "trade", "export", "budget", "currency", "investor",
                "tariff", "revenue", "interest", "employment"],
    "health": ["hospital", "vaccine", "doctor", "patient", "clinic", "disease", "treatment", "nurse",
               "outbreak", "medicine", "surgery", "infection"],
    "science": ["research", "laboratory", "satellite", "experiment", "climate", "physics", "telescope",
                "genome", "energy", "ocean", "fossil", "robot"],
}
DEFAULT_FAKE_MARKERS = ["shocking", "unbelievable", "outrageous", "secret", "miracle", "destroyed",
                        "insane", "terrifying", "exposed", "scandalous", "horrifying", "bombshell"]
DEFAULT_AUTHENTIC_MARKERS = ["according", "official", "statement", "data", "percent", "announced",
                             "confirmed", "quarterly", "spokesperson", "estimated", "survey", "documented"]


@dataclass(frozen=True)
class CorpusSpec:
    areas: tuple[str, ...] = ("north", "south", "east", "west")
    topics: Mapping[str, tuple[str, ...]] = field(
        default_factory=lambda: {k: tuple(v) for k, v in DEFAULT_TOPICS.items()}
    )
    fake_markers: tuple[str, ...] = tuple(DEFAULT_FAKE_MARKERS)
    authentic_markers: tuple[str, ...] = tuple(DEFAULT_AUTHENTIC_MARKERS)
    filler: tuple[str, ...] = ("news",)
    body_length: int = 30
    title_length: int = 5
    marker_count: int = 4
    marker_noise: float = 0.1

    @property
    def domains(self) -> tuple[str, ...]:
        return tuple(sorted(self.topics))

    def validate(self) -> None:
        fake = {m.lower() for m in self.fake_markers}
        real = {m.lower() for m in self.authentic_markers}
        if fake & real:
            raise OverlappingVocabularies(f"marker vocabularies overlap: {sorted(fake & real)}")
        if not fake or not real:
            raise ConfigError("both marker vocabularies must be non-empty")
        if not self.areas or not self.topics or any(not words for words in self.topics.values()):
            raise ConfigError("corpus needs areas and non-empty topic vocabularies")
        for name in ("body_length", "title_length", "marker_count"):
            _count(f"corpus.{name}", getattr(self, name))
        _prob("corpus.marker_noise", self.marker_noise)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CorpusSpec":
        d = dict(d)
        for key in ("areas", "fake_markers", "authentic_markers", "filler"):
            if key in d:
                d[key] = tuple(d[key])
        if "topics" in d:
            d["topics"] = {k: tuple(v) for k, v in d["topics"].items()}
        return cls(**_known(cls, d, "corpus"))


@dataclass(frozen=True)
class ClassifierSettings:
    dims: int = DEFAULT_DIMS
    learning_rate: float = DEFAULT_LEARNING_RATE
    epochs: int = DEFAULT_EPOCHS
    max_df: float = DEFAULT_MAX_DF

    def validate(self) -> None:
        if self.dims < 1 or self.epochs < 0 or not self.learning_rate > 0:
            raise ConfigError("classifier settings out of range")
        _prob("classifier.max_df", self.max_df)


def _known(cls, d: Mapping[str, Any], where: str) -> dict:
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return dict(d)


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    name: str = "scenario"
    article_count: int = 500
    bootstrap_articles: int = 50
    reporters: tuple[ReporterCohort, ...] = ()
    journalists: tuple[AnalyzerCohort, ...] = ()
    locals: tuple[AnalyzerCohort, ...] = ()
    machine_analyzers: int = 1
    validators: tuple[ValidatorCohort, ...] = ()
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    scoring: ScoringParams = field(default_factory=ScoringParams)
    panel: PanelSpec = field(default_factory=PanelSpec)
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)
    resolution_delay: int = 10
    max_validators: int = DEFAULT_MAX_VALIDATORS
    growth_rate: float = DEFAULT_GROWTH_RATE
    local_tags_per_analyzer: int = 2

    def validate(self) -> "ScenarioConfig":
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for name in ("article_count", "bootstrap_articles", "machine_analyzers", "resolution_delay",
                     "max_validators", "local_tags_per_analyzer"):
            _count(name, getattr(self, name))
        _prob("growth_rate", self.growth_rate)
        for group in (self.reporters, self.journalists, self.locals, self.validators):
            names = [c.name for c in group]
            if len(set(names)) != len(names):
                raise ConfigError(f"duplicate cohort names: {names}")
            for cohort in group:
                cohort.validate()
        if sum(c.count for c in self.reporters) < 1:
            raise ConfigError("need at least one reporter")
        if self.max_validators < 1:
            raise ConfigError("max_validators must be at least 1")
        if self.panel.n_dl > self.machine_analyzers:
            raise ConfigError("panel asks for more machine analyzers than the roster has")
        if self.panel.n_journalist > sum(c.count for c in self.journalists):
            raise ConfigError("panel asks for more journalists than the roster has")
        if self.panel.n_journalist + self.panel.n_local < 1:
            raise ConfigError("panel needs at least one human analyzer for the bootstrap phase")
        self.corpus.validate()
        self.classifier.validate()
        return self

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ScenarioConfig":
        d = dict(_known(cls, d, "scenario"))
        if "seed" not in d:
            raise ConfigError("config must set a seed")
        try:
            d["reporters"] = tuple(ReporterCohort(**c) for c in d.get("reporters", ()))
            d["journalists"] = tuple(AnalyzerCohort(**c) for c in d.get("journalists", ()))
            d["locals"] = tuple(AnalyzerCohort(**c) for c in d.get("locals", ()))
            d["validators"] = tuple(ValidatorCohort(**c) for c in d.get("validators", ()))
            if "corpus" in d:
                d["corpus"] = CorpusSpec.from_dict(d["corpus"])
            if "scoring" in d:
                d["scoring"] = ScoringParams(**_known(ScoringParams, d["scoring"], "scoring"))
            if "panel" in d:
                d["panel"] = PanelSpec(**_known(PanelSpec, d["panel"], "panel"))
            if "classifier" in d:
                d["classifier"] = ClassifierSettings(**_known(ClassifierSettings, d["classifier"], "classifier"))
            return cls(**d).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["corpus"]["topics"] = {k: list(v) for k, v in self.corpus.topics.items()}
        return d

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(raw)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        from dataclasses import replace

        return replace(self, seed=seed).validate()


def default_adversarial(seed: int = 2021) -> ScenarioConfig:
    """10 reporters (2 malicious at p_fake 0.8), 1+2+2 panels, 25 validators, 500 articles."""
    return ScenarioConfig(
        seed=seed,
        name="default-adversarial",
        article_count=500,
        reporters=(
            ReporterCohort("honest", 8, p_fake=0.0),
            ReporterCohort("malicious", 2, p_fake=0.8),
        ),
        journalists=(AnalyzerCohort("honest", 8, accuracy=0.9),),
        locals=(AnalyzerCohort("honest", 16, accuracy=0.9),),
        machine_analyzers=1,
        validators=(ValidatorCohort("balanced", 25, 0.8, 0.2),),
    ).validate()
