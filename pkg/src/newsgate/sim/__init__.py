"""Scenario-driven multi-agent simulation of the protocol."""

from .config import (
    AnalyzerCohort,
    ClassifierSettings,
    CorpusSpec,
    ReporterCohort,
    ScenarioConfig,
    ValidatorCohort,
    default_adversarial,
)
from .corpus import SyntheticArticle, generate_article, generate_corpus
from .runner import ScenarioResult, run_scenario, write_outputs

__all__ = [
    "AnalyzerCohort",
    "ClassifierSettings",
    "CorpusSpec",
    "ReporterCohort",
    "ScenarioConfig",
    "ScenarioResult",
    "SyntheticArticle",
    "ValidatorCohort",
    "default_adversarial",
    "generate_article",
    "generate_corpus",
    "run_scenario",
    "write_outputs",
]
