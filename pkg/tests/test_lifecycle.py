import dataclasses

import pytest
from support import Scripted, fuzz_sequence, legal_path, small_engine, submit

from newsgate.errors import (
    AlreadyResolved,
    CommitmentMismatch,
    InvalidRating,
    InvalidState,
    NotAReporter,
    NoValidators,
    UnknownArticle,
)
from newsgate.ledger import TxKind, canonical_json
from newsgate.lifecycle import ArticleState, content_digest
from newsgate.scoring import PublicationGate, ScoringParams, Truth
from newsgate.sim.audit import completeness_problems, gate_violations


def test_submit_hides_reporter():
    engine, _ = small_engine()
    art = submit(engine)
    (tx,) = engine.ledger.query(TxKind.SUBMIT)
    assert "rep" not in canonical_json(tx.to_json())
    assert tx.payload["commitment"] == art.commitment.hex()
    assert tx.payload["content_digest"] == content_digest(art.title, art.body)
    assert art.state is ArticleState.SUBMITTED


def test_submit_rejects_bad_rating():
    engine, _ = small_engine()
    with pytest.raises(InvalidRating):
        submit(engine, lam=6)
    assert engine.ledger.query(TxKind.SUBMIT) == []


def test_submit_requires_reporter():
    engine, _ = small_engine()
    with pytest.raises(NotAReporter):
        submit(engine, reporter="j0")


def test_commitments_are_fresh():
    engine, _ = small_engine()
    assert submit(engine).commitment != submit(engine).commitment


def test_gate_passes_at_3_2():
    engine, provider = small_engine()
    engine.registry.get("j0").credibility = 0.8
    art = submit(engine)
    provider.rating = 4.0
    engine.run_analysis(art.article_id)
    assert art.score_A == pytest.approx(3.2)
    assert art.state is ArticleState.UNDER_VALIDATION


def test_gate_rejects_at_1_and_no_beliefs_follow():
    engine, provider = small_engine()
    provider.rating = 2.0
    art = submit(engine)
    engine.run_analysis(art.article_id)
    assert art.score_A == 1.0
    assert art.state is ArticleState.REJECTED_AT_ANALYSIS
    with pytest.raises(InvalidState):
        engine.run_validation(art.article_id)
    engine.resolve(art.article_id, Truth.FAKE)
    assert engine.ledger.query(TxKind.VALIDATOR_BELIEF, article_id=art.article_id) == []


def test_each_transition_is_one_block():
    engine, _ = small_engine()
    art = submit(engine)
    heights = [engine.ledger.height]
    for step in (engine.run_analysis, engine.run_validation, engine.decide_publication):
        step(art.article_id)
        heights.append(engine.ledger.height)
    engine.resolve(art.article_id, Truth.AUTHENTIC)
    heights.append(engine.ledger.height)
    assert [b - a for a, b in zip(heights, heights[1:])] == [1, 1, 1, 1]


def test_three_of_five_believe():
    engine, provider = small_engine()
    provider.beliefs = {"v0": False, "v1": False}
    art = submit(engine)
    engine.run_analysis(art.article_id)
    tally = engine.run_validation(art.article_id)
    assert (tally.eta, tally.eta_b) == (5, 3)
    assert art.score_V == 3.0
    assert len(engine.ledger.query(TxKind.VALIDATOR_BELIEF)) == 5


def test_unanimous_belief():
    engine, _ = small_engine()
    art = submit(engine)
    engine.run_analysis(art.article_id)
    engine.run_validation(art.article_id)
    assert art.score_V == 5.0


def test_no_matching_validators():
    engine, _ = small_engine(validator_tags=("south",))
    art = submit(engine)
    engine.run_analysis(art.article_id)
    with pytest.raises(NoValidators):
        engine.run_validation(art.article_id)


def test_publish_at_0_62_and_reveal():
    engine, provider = small_engine(params=ScoringParams(0.2, 0.5, 0.3))
    engine.registry.get("j0").credibility = 0.6
    provider.rating = 5.0
    provider.beliefs = {"v0": False}
    art = submit(engine, lam=4.0)
    engine.run_analysis(art.article_id)
    engine.run_validation(art.article_id)
    assert engine.decide_publication(art.article_id) is PublicationGate.PUBLISHED
    assert art.score_total == pytest.approx(0.62, abs=1e-15)
    (tx,) = engine.ledger.query(TxKind.PUBLICATION_DECISION)
    assert tx.payload["reporter"] == "rep"
    assert {tx.payload[k] for k in ("score_R", "score_A", "score_V")} == {2.0, 3.0, 4.0}


def test_reject_at_0_3_and_penalize_later():
    engine, provider = small_engine(params=ScoringParams(0.2, 0.5, 0.3))
    provider.rating = 2.0
    provider.beliefs = {"v0": False, "v1": False}
    art = submit(engine, lam=1.0)
    engine.run_analysis(art.article_id, force_proceed=True)
    engine.run_validation(art.article_id)
    assert engine.decide_publication(art.article_id) is PublicationGate.REJECTED
    assert art.score_total == pytest.approx(0.3, abs=1e-15)
    assert art.revealed_reporter == "rep"
    engine.resolve(art.article_id, Truth.FAKE)
    assert engine.registry.get("rep").credibility < 0.5


def test_tampered_nonce_is_caught():
    engine, _ = small_engine()
    art = submit(engine)
    engine.run_analysis(art.article_id)
    engine.run_validation(art.article_id)
    secret = engine._secrets[art.article_id]
    engine._secrets[art.article_id] = dataclasses.replace(secret, nonce=bytes(32))
    with pytest.raises(CommitmentMismatch):
        engine.decide_publication(art.article_id)
    assert art.quarantined
    assert engine.ledger.query(TxKind.PUBLICATION_DECISION) == []


def test_fake_publication_lowers_reporter_credibility():
    engine, _ = small_engine()
    art = submit(engine)
    for step in (engine.run_analysis, engine.run_validation, engine.decide_publication):
        step(art.article_id)
    assert art.state is ArticleState.PUBLISHED
    before = engine.registry.get("rep").credibility
    engine.resolve(art.article_id, Truth.FAKE)
    rep = engine.registry.get("rep")
    assert rep.fake_count == 1 and rep.credibility < before
    assert art.state is ArticleState.RESOLVED


def test_low_rating_on_fake_is_true_negative():
    engine, provider = small_engine()
    provider.rating = 1.0
    art = submit(engine)
    engine.run_analysis(art.article_id, force_proceed=True)
    engine.run_validation(art.article_id)
    engine.decide_publication(art.article_id)
    engine.resolve(art.article_id, Truth.FAKE)
    assert engine.registry.get("j0").confusion.tn == 1


def test_resolve_twice():
    engine, _ = small_engine()
    art = submit(engine)
    engine.run_analysis(art.article_id)
    engine.run_validation(art.article_id)
    engine.decide_publication(art.article_id)
    engine.resolve(art.article_id, Truth.AUTHENTIC)
    with pytest.raises(AlreadyResolved):
        engine.resolve(art.article_id, Truth.AUTHENTIC)


def test_out_of_order_operations():
    engine, _ = small_engine()
    art = submit(engine)
    with pytest.raises(InvalidState):
        engine.decide_publication(art.article_id)
    with pytest.raises(InvalidState):
        engine.resolve(art.article_id, Truth.FAKE)
    with pytest.raises(UnknownArticle):
        engine.run_analysis("a424242")


def test_audits_on_a_mixed_run():
    engine, provider = small_engine(n_journalist=2)
    for i, rating in enumerate([4.5, 1.0, 3.0, 0.5, 5.0]):
        provider.rating = rating
        art = submit(engine)
        engine.run_analysis(art.article_id)
        if art.state is ArticleState.UNDER_VALIDATION:
            engine.run_validation(art.article_id)
            engine.decide_publication(art.article_id)
        engine.resolve(art.article_id, Truth.FAKE if i % 2 else Truth.AUTHENTIC)
        assert legal_path(art.history)
    assert completeness_problems(engine.ledger) == []
    assert gate_violations(engine.ledger, engine.params) == []


def test_state_machine_fuzz():
    problems = [p for seed in range(2000) for p in fuzz_sequence(seed)]
    assert problems == []
