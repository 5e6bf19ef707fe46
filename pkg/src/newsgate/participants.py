"""Participant registry, pseudonym commitments and credibility dynamics."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, TextIO

from .errors import (
    AlreadyResolved,
    DuplicateId,
    EmptyRoles,
    NoHistory,
    NonPositiveTheta,
    NotAReporter,
    UnknownParticipant,
)
from .ledger import Ledger, TxKind
from .scoring import RatingRecord, Truth, ValidationTally, is_real_verdict

INITIAL_CREDIBILITY = 0.5
DEFAULT_GROWTH_RATE = 0.1


class Role(str, Enum):
    REPORTER = "Reporter"
    JOURNALIST = "AnalyzerJournalist"
    LOCAL = "AnalyzerLocal"
    MACHINE = "AnalyzerDL"
    VALIDATOR = "Validator"


ANALYZER_ROLES = frozenset({Role.JOURNALIST, Role.LOCAL, Role.MACHINE})


def normalize_tags(tags: Iterable[str]) -> frozenset[str]:
    return frozenset(t.strip().lower() for t in tags if t.strip())


@dataclass
class Confusion:
    """Analyzer verdicts against ground truth; "positive" means a real verdict."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def record(self, said_real: bool, truth: Truth) -> None:
        authentic = truth is Truth.AUTHENTIC
        if said_real and authentic:
            self.tp += 1
        elif said_real:
            self.fp += 1
        elif authentic:
            self.fn += 1
        else:
            self.tn += 1


@dataclass
class Participant:
    id: str
    roles: frozenset[Role]
    area_tags: frozenset[str] = frozenset()
    domain_tags: frozenset[str] = frozenset()
    credibility: float = INITIAL_CREDIBILITY
    fake_count: int = 0
    genuine_count: int = 0
    confusion: Confusion = field(default_factory=Confusion)
    agreement_history: list[float] = field(default_factory=list)

    @property
    def tags(self) -> frozenset[str]:
        return self.area_tags | self.domain_tags

    def has_role(self, role: Role) -> bool:
        return role in self.roles


# -- pseudonyms ----------------------------------------------------------------


def commitment_digest(participant_id: str, nonce: bytes) -> bytes:
    raw = participant_id.encode("utf-8")
    return hashlib.sha256(struct.pack("<I", len(raw)) + raw + nonce).digest()


@dataclass(frozen=True)
class PseudonymCommitment:
    commitment: bytes
    nonce: bytes

    @classmethod
    def create(cls, participant_id: str, nonce: bytes) -> "PseudonymCommitment":
        if len(nonce) != 32:
            raise ValueError("nonce must be 32 bytes")
        return cls(commitment_digest(participant_id, nonce), nonce)

    def opens_to(self, participant_id: str, nonce: bytes | None = None) -> bool:
        return commitment_digest(participant_id, self.nonce if nonce is None else nonce) == self.commitment


# -- credibility rules -----------------------------------------------------------


def reporter_credibility(
    delta: float, theta: float, fake_count: int, genuine_count: int, growth_rate: float = DEFAULT_GROWTH_RATE
) -> float:
    """Next reporter credibility from the pre-update value and publication record.

    With at least one resolved fake the penalty rule applies, using
    ``max(genuine_count, 1)`` so a reporter with no genuine articles yet stays
    finite.  Without any fakes credibility grows geometrically toward 1.
    """
    if not theta > 0:
        raise NonPositiveTheta(f"theta must be positive, got {theta!r}")
    if fake_count >= 1:
        denom = delta + theta * (fake_count / max(genuine_count, 1))
        new = delta / denom
    else:
        new = min(1.0, delta + growth_rate * (1.0 - delta))
    return min(1.0, max(0.0, new))


def analyzer_credibility(confusion: Confusion, agreement_history: list[float]) -> float:
    """Accuracy over all resolved verdicts times mean validator agreement."""
    if confusion.total < 1 or not agreement_history:
        raise NoHistory("analyzer has no resolved analyses with validator agreement")
    accuracy = (confusion.tp + confusion.tn) / confusion.total
    agreement = sum(agreement_history) / len(agreement_history)
    return min(1.0, max(0.0, accuracy * agreement))


@dataclass
class ResolutionOutcome:
    article_id: str
    truth: Truth
    reporter_id: str
    reporter_credibility: tuple[float, float]
    analyzer_credibility: dict[str, tuple[float, float]] = field(default_factory=dict)


class Registry:
    """All participants plus their credibility state.

    Mutated only by the lifecycle engine; every state change is mirrored to
    the ledger when one is attached.
    """

    def __init__(self, ledger: Ledger | None = None, growth_rate: float = DEFAULT_GROWTH_RATE):
        self.ledger = ledger
        self.growth_rate = growth_rate
        self._participants: dict[str, Participant] = {}
        self._resolved: set[str] = set()
        self._seq = 0

    def __contains__(self, participant_id: str) -> bool:
        return participant_id in self._participants

    def __iter__(self) -> Iterator[Participant]:
        return iter(self._participants.values())

    def __len__(self) -> int:
        return len(self._participants)

    def get(self, participant_id: str) -> Participant:
        try:
            return self._participants[participant_id]
        except KeyError:
            raise UnknownParticipant(participant_id) from None

    def with_role(self, role: Role) -> list[Participant]:
        return [p for p in self._participants.values() if role in p.roles]

    def credibility_snapshot(self) -> dict[str, float]:
        return {pid: p.credibility for pid, p in self._participants.items()}

    def _emit(self, kind: TxKind, **kwargs) -> None:
        if self.ledger is not None:
            self.ledger.emit(kind, **kwargs)

    def register(
        self,
        roles: Iterable[Role | str],
        area_tags: Iterable[str] = (),
        domain_tags: Iterable[str] = (),
        participant_id: str | None = None,
    ) -> Participant:
        roles = frozenset(Role(r) for r in roles)
        if not roles:
            raise EmptyRoles("a participant needs at least one role")
        if participant_id is None:
            while True:
                participant_id = f"p{self._seq:05d}"
                self._seq += 1
                if participant_id not in self._participants:
                    break
        elif participant_id in self._participants:
            raise DuplicateId(participant_id)
        p = Participant(
            id=participant_id,
            roles=roles,
            area_tags=normalize_tags(area_tags),
            domain_tags=normalize_tags(domain_tags),
        )
        self._participants[p.id] = p
        self._emit(
            TxKind.REGISTER,
            actor=p.id,
            payload={
                "roles": sorted(r.value for r in roles),
                "area_tags": sorted(p.area_tags),
                "domain_tags": sorted(p.domain_tags),
                "credibility": p.credibility,
            },
        )
        return p

    def update_reporter_credibility(self, reporter_id: str, theta: float, article_id: str | None = None) -> float:
        p = self.get(reporter_id)
        if Role.REPORTER not in p.roles:
            raise NotAReporter(reporter_id)
        old = p.credibility
        p.credibility = reporter_credibility(old, theta, p.fake_count, p.genuine_count, self.growth_rate)
        self._emit(
            TxKind.CREDIBILITY_UPDATE,
            article_id=article_id,
            actor=p.id,
            payload={"role": Role.REPORTER.value, "old": old, "new": p.credibility},
        )
        return p.credibility

    def update_analyzer_credibility(self, analyzer_id: str, article_id: str | None = None) -> float:
        p = self.get(analyzer_id)
        old = p.credibility
        p.credibility = analyzer_credibility(p.confusion, p.agreement_history)
        self._emit(
            TxKind.CREDIBILITY_UPDATE,
            article_id=article_id,
            actor=p.id,
            payload={"role": "Analyzer", "old": old, "new": p.credibility},
        )
        return p.credibility

    def record_resolution_outcome(
        self,
        article_id: str,
        truth: Truth | str,
        reporter_id: str,
        ratings: Iterable[RatingRecord],
        tally: ValidationTally | None,
        theta: float,
    ) -> ResolutionOutcome:
        """Fold one ground-truth verdict into reporter and analyzer state.

        Analyzers always get their confusion counters updated.  An agreement
        ratio is only appended when the article reached validation, and an
        analyzer's credibility is only recomputed once it has some agreement
        history.
        """
        truth = Truth(truth)
        if article_id in self._resolved:
            raise AlreadyResolved(article_id)
        if not theta > 0:
            raise NonPositiveTheta(f"theta must be positive, got {theta!r}")
        reporter = self.get(reporter_id)
        if Role.REPORTER not in reporter.roles:
            raise NotAReporter(reporter_id)
        ratings = list(ratings)
        for r in ratings:
            self.get(r.actor_id)
        self._resolved.add(article_id)

        if truth is Truth.FAKE:
            reporter.fake_count += 1
        else:
            reporter.genuine_count += 1
        old_r = reporter.credibility
        new_r = self.update_reporter_credibility(reporter_id, theta, article_id)
        outcome = ResolutionOutcome(article_id, truth, reporter_id, (old_r, new_r))

        for r in ratings:
            analyzer = self.get(r.actor_id)
            analyzer.confusion.record(is_real_verdict(r.lam), truth)
            if tally is not None and r.actor_id in tally.per_analyzer_agreement:
                analyzer.agreement_history.append(tally.agreement_ratio(r.actor_id))
            if analyzer.agreement_history:
                old_a = analyzer.credibility
                outcome.analyzer_credibility[r.actor_id] = (
                    old_a,
                    self.update_analyzer_credibility(r.actor_id, article_id),
                )
        return outcome

    def is_resolved(self, article_id: str) -> bool:
        return article_id in self._resolved

    # -- roster / trajectory files -----------------------------------------

    def import_roster(self, fh: TextIO) -> list[Participant]:
        """Register one participant per JSON line: ``{"id", "roles", "area_tags", "domain_tags"}``."""
        added = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            added.append(
                self.register(
                    rec["roles"],
                    rec.get("area_tags", ()),
                    rec.get("domain_tags", ()),
                    participant_id=rec.get("id"),
                )
            )
        return added

    def export_roster(self, fh: TextIO) -> None:
        for p in self:
            rec = {
                "id": p.id,
                "roles": sorted(r.value for r in p.roles),
                "area_tags": sorted(p.area_tags),
                "domain_tags": sorted(p.domain_tags),
            }
            fh.write(json.dumps(rec) + "\n")


def credibility_trajectories(ledger: Ledger) -> list[tuple[int, str, float]]:
    """(tick, participant, credibility) rows rebuilt from the ledger event log."""
    rows = []
    for tx in ledger.transactions():
        if tx.kind is TxKind.REGISTER:
            rows.append((tx.timestamp, tx.actor, tx.payload["credibility"]))
        elif tx.kind is TxKind.CREDIBILITY_UPDATE:
            rows.append((tx.timestamp, tx.actor, tx.payload["new"]))
    return rows


def write_trajectories_csv(rows: Iterable[tuple[int, str, float]], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["tick", "participant", "credibility"])
    for tick, pid, value in rows:
        writer.writerow([tick, pid, f"{value:.12g}"])
