"""Article lifecycle state machine.

One :class:`Engine` drives articles from pseudonymous submission through
panel analysis, validator belief, the publication decision with identity
reveal, and eventual ground-truth resolution.  Each transition of one
article is sealed into its own ledger block.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable

from .errors import (
    AlreadyResolved,
    CommitmentMismatch,
    InvalidRating,
    InvalidState,
    NotAReporter,
    NoValidators,
    UnknownArticle,
)
from .ledger import Ledger, TxKind
from .participants import Participant, PseudonymCommitment, Registry, Role, normalize_tags
from .scoring import (
    AnalysisGate,
    PublicationGate,
    RatingRecord,
    ScoringParams,
    Truth,
    ValidationTally,
    analyzer_rating,
    gate_after_analysis,
    gate_after_validation,
    is_real_verdict,
    reporter_rating,
    total_score,
    validator_belief,
)
from .selection import PanelSpec, RatingProvider, panel_ratings, select_panel

BeliefProvider = Callable[[Participant, Any], bool]

DEFAULT_MAX_VALIDATORS = 25


class ArticleState(str, Enum):
    SUBMITTED = "Submitted"
    UNDER_ANALYSIS = "UnderAnalysis"
    REJECTED_AT_ANALYSIS = "RejectedAtAnalysis"
    UNDER_VALIDATION = "UnderValidation"
    PUBLISHED = "Published"
    REJECTED_FAKE = "RejectedFake"
    RESOLVED = "Resolved"


S = ArticleState
LEGAL_TRANSITIONS: dict[ArticleState, frozenset[ArticleState]] = {
    S.SUBMITTED: frozenset({S.UNDER_ANALYSIS}),
    S.UNDER_ANALYSIS: frozenset({S.REJECTED_AT_ANALYSIS, S.UNDER_VALIDATION}),
    S.UNDER_VALIDATION: frozenset({S.PUBLISHED, S.REJECTED_FAKE}),
    S.REJECTED_AT_ANALYSIS: frozenset({S.RESOLVED}),
    S.PUBLISHED: frozenset({S.RESOLVED}),
    S.REJECTED_FAKE: frozenset({S.RESOLVED}),
    S.RESOLVED: frozenset(),
}
TERMINAL_DECISIONS = frozenset({S.REJECTED_AT_ANALYSIS, S.PUBLISHED, S.REJECTED_FAKE})


def content_digest(title: str, body: str) -> str:
    h = hashlib.sha256()
    for part in (title, body):
        raw = part.encode("utf-8")
        h.update(struct.pack("<I", len(raw)) + raw)
    return h.hexdigest()


@dataclass
class NewsArticle:
    article_id: str
    title: str
    body: str
    area_tags: frozenset[str]
    domain_tags: frozenset[str]
    commitment: bytes
    reporter_lambda: float
    submitted_at: int = 0
    state: ArticleState = ArticleState.SUBMITTED
    history: list[ArticleState] = field(default_factory=lambda: [ArticleState.SUBMITTED])
    panel: list[str] = field(default_factory=list)
    ratings: list[RatingRecord] = field(default_factory=list)
    tally: ValidationTally | None = None
    beliefs: dict[str, bool] = field(default_factory=dict)
    score_R: float | None = None
    score_A: float | None = None
    score_V: float | None = None
    score_total: float | None = None
    forced: bool = False
    quarantined: bool = False
    revealed_reporter: str | None = None
    # latent label for simulated agents; the engine never reads it
    truth: Truth | None = None

    @property
    def tags(self) -> frozenset[str]:
        return self.area_tags | self.domain_tags


@dataclass(frozen=True)
class _Secret:
    reporter_id: str
    nonce: bytes
    reporter_score: float


class Engine:
    def __init__(
        self,
        registry: Registry,
        ledger: Ledger,
        rating_provider: RatingProvider,
        belief_provider: BeliefProvider,
        params: ScoringParams | None = None,
        panel_spec: PanelSpec | None = None,
        rng: random.Random | None = None,
        max_validators: int = DEFAULT_MAX_VALIDATORS,
    ):
        self.registry = registry
        self.ledger = ledger
        self.rating_provider = rating_provider
        self.belief_provider = belief_provider
        self.params = params or ScoringParams()
        self.panel_spec = panel_spec or PanelSpec()
        self.rng = rng or random.Random(0)
        self.max_validators = max_validators
        self.articles: dict[str, NewsArticle] = {}
        self._secrets: dict[str, _Secret] = {}
        self._seq = 0

    # -- helpers -------------------------------------------------------------

    def article(self, article_id: str) -> NewsArticle:
        try:
            return self.articles[article_id]
        except KeyError:
            raise UnknownArticle(article_id) from None

    def _require(self, article: NewsArticle, *states: ArticleState) -> None:
        if article.quarantined:
            raise InvalidState(f"{article.article_id} is quarantined")
        if article.state is ArticleState.RESOLVED and ArticleState.RESOLVED not in states:
            raise AlreadyResolved(article.article_id)
        if article.state not in states:
            raise InvalidState(f"{article.article_id} is {article.state.value}")

    @staticmethod
    def _move(article: NewsArticle, new: ArticleState) -> None:
        if new not in LEGAL_TRANSITIONS[article.state]:
            raise AssertionError(f"illegal transition {article.state.value} -> {new.value}")
        article.state = new
        article.history.append(new)

    # -- operations ------------------------------------------------------------

    def submit(
        self,
        reporter_id: str,
        title: str,
        body: str,
        area_tags: Iterable[str],
        domain_tags: Iterable[str],
        reporter_lambda: float,
        nonce: bytes | None = None,
    ) -> NewsArticle:
        reporter = self.registry.get(reporter_id)
        if Role.REPORTER not in reporter.roles:
            raise NotAReporter(reporter_id)
        if not (isinstance(reporter_lambda, (int, float)) and 0.0 <= reporter_lambda <= 5.0):
            raise InvalidRating(f"reporter rating {reporter_lambda!r} outside [0, 5]")
        if nonce is None:
            nonce = self.rng.randbytes(32)
        commitment = PseudonymCommitment.create(reporter_id, nonce)
        article_id = f"a{self._seq:06d}"
        r_score = reporter_rating(RatingRecord(reporter_id, float(reporter_lambda), reporter.credibility, article_id))
        article = NewsArticle(
            article_id=article_id,
            title=title,
            body=body,
            area_tags=normalize_tags(area_tags),
            domain_tags=normalize_tags(domain_tags),
            commitment=commitment.commitment,
            reporter_lambda=float(reporter_lambda),
            submitted_at=self.ledger.tick,
        )
        self.ledger.emit(
            TxKind.SUBMIT,
            article_id=article_id,
            actor=commitment.commitment.hex(),
            payload={
                "commitment": commitment.commitment.hex(),
                "area_tags": sorted(article.area_tags),
                "domain_tags": sorted(article.domain_tags),
                "content_digest": content_digest(title, body),
            },
        )
        self._seq += 1
        self.articles[article_id] = article
        self._secrets[article_id] = _Secret(reporter_id, nonce, r_score)
        return article

    def run_analysis(self, article_id: str, force_proceed: bool = False) -> AnalysisGate:
        """Rate the article with a fresh panel and apply the analyzer gate.

        ``force_proceed`` sends the article on to validation whatever the
        gate says; the simulation uses it while seeding history.
        """
        article = self.article(article_id)
        self._require(article, S.SUBMITTED)
        reporter_id = self._secrets[article_id].reporter_id
        with self.ledger.batch():
            panel = select_panel(article.tags, self.registry, self.panel_spec, self.rng, exclude={reporter_id})
            ratings = panel_ratings(panel, article, self.rating_provider, self.registry, self.ledger)
            a_score = analyzer_rating(ratings)
            gate = gate_after_analysis(a_score, self.params)
            proceed = gate is AnalysisGate.PROCEED or force_proceed
            self.ledger.emit(
                TxKind.ANALYZER_GATE,
                article_id=article_id,
                payload={"score_A": a_score, "decision": gate.value, "forced": bool(force_proceed), "n": len(panel)},
            )
        article.panel = panel
        article.ratings = ratings
        article.score_A = a_score
        article.forced = force_proceed
        self._move(article, S.UNDER_ANALYSIS)
        self._move(article, S.UNDER_VALIDATION if proceed else S.REJECTED_AT_ANALYSIS)
        return gate

    def validator_pool(self, article: NewsArticle) -> list[str]:
        reporter_id = self._secrets[article.article_id].reporter_id
        pool = sorted(
            p.id
            for p in self.registry.with_role(Role.VALIDATOR)
            if p.tags & article.tags and p.id != reporter_id
        )
        if len(pool) > self.max_validators:
            self.rng.shuffle(pool)
            pool = sorted(pool[: self.max_validators])
        return pool

    def run_validation(self, article_id: str) -> ValidationTally:
        article = self.article(article_id)
        self._require(article, S.UNDER_VALIDATION)
        if article.tally is not None:
            raise InvalidState(f"{article_id} already validated")
        pool = self.validator_pool(article)
        if not pool:
            raise NoValidators(f"no validator matches the tags of {article_id}")
        beliefs = {}
        for vid in pool:
            beliefs[vid] = bool(self.belief_provider(self.registry.get(vid), article))
        agreement = {
            r.actor_id: sum(1 for b in beliefs.values() if b == is_real_verdict(r.lam)) for r in article.ratings
        }
        tally = ValidationTally(eta=len(pool), eta_b=sum(beliefs.values()), per_analyzer_agreement=agreement)
        with self.ledger.batch():
            for vid, believe in beliefs.items():
                self.ledger.emit(
                    TxKind.VALIDATOR_BELIEF, article_id=article_id, actor=vid, payload={"believe": believe}
                )
        article.beliefs = beliefs
        article.tally = tally
        article.score_V = validator_belief(tally)
        return tally

    def decide_publication(self, article_id: str) -> PublicationGate:
        article = self.article(article_id)
        self._require(article, S.UNDER_VALIDATION)
        if article.tally is None:
            raise InvalidState(f"{article_id} has no validation tally")
        secret = self._secrets[article_id]
        if not PseudonymCommitment(article.commitment, secret.nonce).opens_to(secret.reporter_id):
            article.quarantined = True
            raise CommitmentMismatch(f"reveal for {article_id} does not open its commitment")
        s_total = total_score(secret.reporter_score, article.score_A, article.score_V, self.params)
        decision = gate_after_validation(s_total, self.params)
        self.ledger.emit(
            TxKind.PUBLICATION_DECISION,
            article_id=article_id,
            actor=secret.reporter_id,
            payload={
                "decision": decision.value,
                "score_R": secret.reporter_score,
                "score_A": article.score_A,
                "score_V": article.score_V,
                "score_total": s_total,
                "reporter": secret.reporter_id,
                "nonce": secret.nonce.hex(),
            },
        )
        article.score_R = secret.reporter_score
        article.score_total = s_total
        article.revealed_reporter = secret.reporter_id
        self._move(article, S.PUBLISHED if decision is PublicationGate.PUBLISHED else S.REJECTED_FAKE)
        return decision

    def resolve(self, article_id: str, truth: Truth | str):
        article = self.article(article_id)
        self._require(article, *TERMINAL_DECISIONS)
        truth = Truth(truth)
        secret = self._secrets[article_id]
        with self.ledger.batch():
            self.ledger.emit(TxKind.RESOLUTION, article_id=article_id, payload={"truth": truth.value})
            outcome = self.registry.record_resolution_outcome(
                article_id, truth, secret.reporter_id, article.ratings, article.tally, self.params.theta
            )
        self._move(article, S.RESOLVED)
        return outcome
