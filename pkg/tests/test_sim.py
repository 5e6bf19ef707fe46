import json
import random
from dataclasses import replace
from pathlib import Path

import pytest

from newsgate.errors import ConfigError, OverlappingVocabularies
from newsgate.ledger import Ledger, TxKind
from newsgate.lifecycle import ArticleState
from newsgate.scoring import Truth
from newsgate.sim import (
    AnalyzerCohort,
    CorpusSpec,
    ReporterCohort,
    ScenarioConfig,
    ValidatorCohort,
    default_adversarial,
    generate_corpus,
    run_scenario,
    write_outputs,
)
from newsgate.sim.agents import derive_rng
from newsgate.sim.audit import anonymity_violations, completeness_problems, gate_violations

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def small(seed=5, **overrides):
    cfg = ScenarioConfig(
        seed=seed,
        name="small",
        article_count=80,
        bootstrap_articles=30,
        reporters=(ReporterCohort("honest", 4), ReporterCohort("malicious", 2, p_fake=0.8)),
        journalists=(AnalyzerCohort("honest", 4),),
        locals=(AnalyzerCohort("honest", 8),),
        validators=(ValidatorCohort("balanced", 10),),
    )
    return replace(cfg, **overrides).validate()


@pytest.fixture(scope="module")
def small_run():
    return run_scenario(small())


# -- corpus -----------------------------------------------------------------------------


def test_corpus_has_exact_fake_count():
    arts = generate_corpus(CorpusSpec(), 200, 0.5, random.Random(0))
    assert sum(a.truth is Truth.FAKE for a in arts) == 100


def test_corpus_is_deterministic():
    assert generate_corpus(CorpusSpec(), 30, 0.4, random.Random(8)) == generate_corpus(
        CorpusSpec(), 30, 0.4, random.Random(8)
    )


def test_overlapping_markers_rejected():
    spec = CorpusSpec(fake_markers=("shocking", "Data"), authentic_markers=("data", "official"))
    with pytest.raises(OverlappingVocabularies):
        generate_corpus(spec, 10, 0.5, random.Random(0))


def test_derived_streams_are_independent_of_call_order():
    a = derive_rng(1, "x").random()
    derive_rng(1, "y").random()
    assert derive_rng(1, "x").random() == a
    assert derive_rng(2, "x").random() != a


# -- scenarios ---------------------------------------------------------------------------------


def test_no_malicious_reporters_means_no_fake_publications():
    cfg = small(
        reporters=(ReporterCohort("honest", 5),),
        journalists=(AnalyzerCohort("perfect", 4, accuracy=1.0, noise=0.0),),
        locals=(AnalyzerCohort("perfect", 8, accuracy=1.0, noise=0.0),),
        validators=(ValidatorCohort("perfect", 10, 1.0, 0.0),),
    )
    result = run_scenario(cfg)
    assert result.metrics["fake_total"] == 0
    assert result.metrics["fake_published_rate"] == 0


def test_same_seed_same_everything(tmp_path):
    a, b = run_scenario(small(seed=9)), run_scenario(small(seed=9))
    pa, pb = write_outputs(a, tmp_path / "a"), write_outputs(b, tmp_path / "b")
    for name in pa:
        assert pa[name].read_bytes() == pb[name].read_bytes(), name
    assert run_scenario(small(seed=10)).metrics["ledger_tip_hash"] != a.metrics["ledger_tip_hash"]


def test_conservation(small_run):
    m = small_run.metrics
    assert sum(m["gate_decisions"].values()) == m["article_count"] == 80
    assert m["fake_total"] + m["authentic_total"] == 80
    arts = small_run.engine.articles.values()
    assert all(a.state is ArticleState.RESOLVED for a in arts)
    assert len(small_run.ledger.query(TxKind.RESOLUTION)) == 110


def test_ledger_audits_are_clean(small_run):
    ledger = small_run.ledger
    assert ledger.verify_chain().ok
    assert anonymity_violations(ledger, small_run.authorship) == []
    assert completeness_problems(ledger) == []
    assert gate_violations(ledger, small_run.config.scoring) == []


def test_rates_are_probabilities(small_run):
    for key in ("fake_published_rate", "authentic_rejected_rate", "classifier_heldout_accuracy"):
        assert 0.0 <= small_run.metrics[key] <= 1.0


@pytest.mark.parametrize("seed", [3, 4])
def test_penalty_separation(seed):
    result = run_scenario(default_adversarial(seed=seed))
    resolved_per_cohort = {}
    for aid, rid in result.authorship.items():
        cohort = result.cohorts[rid]
        resolved_per_cohort[cohort] = resolved_per_cohort.get(cohort, 0) + 1
    assert min(resolved_per_cohort.values()) >= 20
    cred = result.metrics["mean_final_credibility"]
    assert cred["reporter/malicious"] < cred["reporter/honest"]


def test_trajectories_only_change_at_resolution(small_run):
    ledger = small_run.ledger
    resolution_blocks = {
        b.height for b in ledger.blocks if any(tx.kind is TxKind.RESOLUTION for tx in b.transactions)
    }
    for block in ledger.blocks:
        for tx in block.transactions:
            if tx.kind is TxKind.CREDIBILITY_UPDATE:
                assert block.height in resolution_blocks


def test_trajectory_rows_replay_credibility(small_run):
    last = {}
    for _, pid, value in small_run.trajectories:
        last[pid] = value
    for pid, value in last.items():
        assert small_run.engine.registry.get(pid).credibility == value


def test_single_class_bootstrap_falls_back():
    cfg = small(reporters=(ReporterCohort("honest", 3),), article_count=10, bootstrap_articles=5)
    result = run_scenario(cfg)
    assert result.model is None
    assert result.metrics["classifier_heldout_accuracy"] is None


def test_no_machine_analyzer():
    cfg = small(machine_analyzers=0, panel=replace(small().panel, n_dl=0), article_count=20)
    assert run_scenario(cfg).ledger.verify_chain().ok


def test_outputs_written(tmp_path, small_run):
    paths = write_outputs(small_run, tmp_path)
    assert sorted(p.name for p in paths.values()) == ["ledger.jsonl", "metrics.json", "trajectories.csv"]
    metrics = json.loads(paths["metrics.json"].read_text())
    assert metrics["ledger_tip_hash"] == small_run.ledger.tip_hash().hex()
    assert Ledger.load(paths["ledger.jsonl"]).tip_hash() == small_run.ledger.tip_hash()
    assert not list(tmp_path.glob(".*"))


# -- configuration ---------------------------------------------------------------------------------


def test_config_round_trips_through_dict():
    cfg = default_adversarial()
    assert ScenarioConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_shipped_scenario_file_matches_default():
    assert ScenarioConfig.load(SCENARIOS / "default_adversarial.json") == default_adversarial()


@pytest.mark.parametrize(
    "patch",
    [
        {"seed": None},
        {"bogus": 1},
        {"reporters": [{"name": "x", "count": 1, "p_fake": 1.5}]},
        {"article_count": -1},
        {"scoring": {"omega1": 0.5, "omega2": 0.5, "omega3": 0.5}},
        {"panel": {"n_dl": 0, "n_journalist": 0, "n_local": 0}},
        {"locals": [{"name": "x", "count": 2, "behavior": "lazy"}]},
    ],
)
def test_bad_configs(patch):
    d = default_adversarial().to_dict()
    d.update(patch)
    if patch.get("seed", 0) is None:
        del d["seed"]
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(d)


def test_seed_override():
    assert default_adversarial().with_seed(7).seed == 7
    with pytest.raises(ConfigError):
        default_adversarial().with_seed(-1)
