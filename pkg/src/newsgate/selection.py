"""Per-article analyzer panel assembly."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable

from .errors import (
    ConfigError,
    InsufficientJournalists,
    InsufficientMachineAnalyzers,
    ProviderFailure,
)
from .ledger import Ledger, TxKind
from .participants import Participant, Registry, Role, normalize_tags
from .scoring import RatingRecord

RatingProvider = Callable[[Participant, Any], float]


@dataclass(frozen=True)
class PanelSpec:
    n_dl: int = 1
    n_journalist: int = 2
    n_local: int = 2

    def __post_init__(self):
        counts = (self.n_dl, self.n_journalist, self.n_local)
        if any(not isinstance(c, int) or c < 0 for c in counts):
            raise ConfigError(f"panel counts must be non-negative integers: {counts}")
        if sum(counts) < 1:
            raise ConfigError("panel must have at least one analyzer")

    @property
    def size(self) -> int:
        return self.n_dl + self.n_journalist + self.n_local


def _shuffled(ids: Iterable[str], rng: random.Random) -> list[str]:
    pool = sorted(ids)
    rng.shuffle(pool)
    return pool


def select_panel(
    article_tags: Iterable[str],
    roster: Iterable[Participant],
    spec: PanelSpec,
    rng: random.Random,
    exclude: Iterable[str] = (),
) -> list[str]:
    """Pick machine analyzers, random journalists and tag-matched locals.

    Each group is drawn by shuffling its sorted id list and taking a prefix.
    Local slots that cannot be filled from tag matches are backfilled with
    the journalists left over from the journalist draw.
    """
    roster = list(roster)
    excluded = set(exclude)
    tags = normalize_tags(article_tags)

    machines = _shuffled((p.id for p in roster if Role.MACHINE in p.roles and p.id not in excluded), rng)
    if len(machines) < spec.n_dl:
        raise InsufficientMachineAnalyzers(f"need {spec.n_dl} machine analyzers, have {len(machines)}")
    panel = machines[: spec.n_dl]
    taken = set(panel)

    journalists = _shuffled(
        (p.id for p in roster if Role.JOURNALIST in p.roles and p.id not in excluded and p.id not in taken),
        rng,
    )
    if len(journalists) < spec.n_journalist:
        raise InsufficientJournalists(f"need {spec.n_journalist} journalists, have {len(journalists)}")
    panel += journalists[: spec.n_journalist]
    spare = journalists[spec.n_journalist :]
    taken.update(panel)

    local_pool = _shuffled(
        (
            p.id
            for p in roster
            if Role.LOCAL in p.roles and p.tags & tags and p.id not in excluded and p.id not in taken
        ),
        rng,
    )
    locals_ = local_pool[: spec.n_local]
    panel += locals_
    taken.update(locals_)

    shortfall = spec.n_local - len(locals_)
    if shortfall:
        panel += [j for j in spare if j not in taken][:shortfall]
    return panel


def panel_ratings(
    panel: Iterable[str],
    article: Any,
    provider: RatingProvider,
    registry: Registry,
    ledger: Ledger | None = None,
) -> list[RatingRecord]:
    """Collect one rating per panelist, snapshotting each panelist's credibility."""
    records = []
    for pid in panel:
        participant = registry.get(pid)
        try:
            lam = float(provider(participant, article))
        except Exception as exc:
            raise ProviderFailure(f"rating provider failed for {pid}: {exc}", pid) from exc
        if not (math.isfinite(lam) and 0.0 <= lam <= 5.0):
            raise ProviderFailure(f"rating {lam!r} from {pid} outside [0, 5]", pid)
        records.append(RatingRecord(pid, lam, participant.credibility, article.article_id))
    if ledger is not None:
        for rec in records:
            ledger.emit(
                TxKind.ANALYZER_RATING,
                article_id=rec.article_id,
                actor=rec.actor_id,
                payload={"lambda": rec.lam, "credibility_snapshot": rec.credibility_snapshot},
            )
    return records
