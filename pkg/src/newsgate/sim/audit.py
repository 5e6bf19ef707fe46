"""Post-hoc ledger audits: anonymity, completeness and gate soundness."""

from __future__ import annotations

from collections import defaultdict
from typing import Mapping

from ..ledger import Ledger, Transaction, TxKind, canonical_json
from ..scoring import AnalysisGate, PublicationGate, ScoringParams


def _by_article(ledger: Ledger) -> dict[str, list[Transaction]]:
    out: dict[str, list[Transaction]] = defaultdict(list)
    for tx in ledger.transactions():
        if tx.article_id is not None:
            out[tx.article_id].append(tx)
    return out


def pre_publication(txs: list[Transaction]) -> list[Transaction]:
    """Transactions of one article before its identity could be known.

    That is everything before the publication decision, or before the
    resolution for articles that never reached validation.
    """
    for i, tx in enumerate(txs):
        if tx.kind in (TxKind.PUBLICATION_DECISION, TxKind.RESOLUTION):
            return txs[:i]
    return list(txs)


def anonymity_violations(ledger: Ledger, authorship: Mapping[str, str]) -> list[tuple[str, int]]:
    """(article_id, tx_id) pairs whose serialized form contains the article's reporter id."""
    found = []
    for article_id, txs in _by_article(ledger).items():
        reporter = authorship.get(article_id)
        if reporter is None:
            continue
        for tx in pre_publication(txs):
            if reporter in canonical_json(tx.to_json()):
                found.append((article_id, tx.tx_id))
    return found


def completeness_problems(ledger: Ledger) -> list[str]:
    problems = []
    for article_id, txs in _by_article(ledger).items():
        kinds = [tx.kind for tx in txs]
        if TxKind.RESOLUTION not in kinds:
            continue
        count = {k: kinds.count(k) for k in TxKind}
        for kind in (TxKind.SUBMIT, TxKind.ANALYZER_GATE, TxKind.RESOLUTION):
            if count[kind] != 1:
                problems.append(f"{article_id}: {count[kind]} {kind.value} transactions")
        gate = next((tx for tx in txs if tx.kind is TxKind.ANALYZER_GATE), None)
        if gate is None:
            continue
        validated = count[TxKind.VALIDATOR_BELIEF] > 0
        if count[TxKind.PUBLICATION_DECISION] != (1 if validated else 0):
            problems.append(f"{article_id}: {count[TxKind.PUBLICATION_DECISION]} PublicationDecision transactions")
        if count[TxKind.ANALYZER_RATING] != gate.payload["n"]:
            problems.append(
                f"{article_id}: {count[TxKind.ANALYZER_RATING]} ratings for a panel of {gate.payload['n']}"
            )
    return problems


def gate_violations(ledger: Ledger, params: ScoringParams) -> list[str]:
    problems = []
    for tx in ledger.query(TxKind.PUBLICATION_DECISION):
        if tx.payload["decision"] == PublicationGate.PUBLISHED.value and tx.payload["score_total"] < params.gate_total:
            problems.append(f"{tx.article_id}: published with score {tx.payload['score_total']}")
    for tx in ledger.query(TxKind.ANALYZER_GATE):
        rejected = tx.payload["decision"] == AnalysisGate.REJECTED.value
        below = tx.payload["score_A"] / 5.0 < params.gate_analyzer
        if rejected != below:
            problems.append(f"{tx.article_id}: analyzer gate {tx.payload['decision']} at score {tx.payload['score_A']}")
    return problems
