"""Shared builders for lifecycle tests and the acceptance run."""

import random

from newsgate.errors import ProtocolError
from newsgate.ledger import Ledger
from newsgate.lifecycle import LEGAL_TRANSITIONS, ArticleState, Engine
from newsgate.participants import Registry, Role
from newsgate.scoring import ScoringParams, Truth
from newsgate.selection import PanelSpec


class Scripted:
    """Providers whose answers the test sets per participant."""

    def __init__(self, rating=5.0, believe=True):
        self.rating = rating
        self.believe = believe
        self.ratings = {}
        self.beliefs = {}

    def rate(self, participant, article):
        return self.ratings.get(participant.id, self.rating)

    def believes(self, participant, article):
        return self.beliefs.get(participant.id, self.believe)


def small_engine(
    n_journalist=1,
    n_validators=5,
    params=None,
    provider=None,
    validator_tags=("north",),
    seed=0,
):
    ledger = Ledger("test")
    reg = Registry(ledger)
    reg.register([Role.REPORTER], participant_id="rep")
    for i in range(n_journalist):
        reg.register([Role.JOURNALIST], participant_id=f"j{i}")
    for i in range(n_validators):
        reg.register([Role.VALIDATOR], area_tags=validator_tags, participant_id=f"v{i}")
    provider = provider or Scripted()
    engine = Engine(
        reg,
        ledger,
        provider.rate,
        provider.believes,
        params=params or ScoringParams(),
        panel_spec=PanelSpec(n_dl=0, n_journalist=n_journalist, n_local=0),
        rng=random.Random(seed),
    )
    return engine, provider


def submit(engine, lam=4.0, reporter="rep", tags=("north",)):
    return engine.submit(reporter, "Budget passes", "The senate approved the budget.", tags, ["politics"], lam)


def legal_path(history):
    return history[0] is ArticleState.SUBMITTED and all(
        b in LEGAL_TRANSITIONS[a] for a, b in zip(history, history[1:])
    )


class _Chaos:
    """Providers that sometimes misbehave, to exercise declared failure paths."""

    def __init__(self, rng):
        self.rng = rng

    def rate(self, participant, article):
        roll = self.rng.random()
        if roll < 0.03:
            raise RuntimeError("provider down")
        if roll < 0.06:
            return 9.0
        return self.rng.uniform(0, 5)

    def believes(self, participant, article):
        return self.rng.random() < 0.5


OPS = ("submit", "analyze", "validate", "decide", "resolve")
NEXT_OP = {
    ArticleState.SUBMITTED: "analyze",
    ArticleState.UNDER_VALIDATION: "validate",
    ArticleState.REJECTED_AT_ANALYSIS: "resolve",
    ArticleState.PUBLISHED: "resolve",
    ArticleState.REJECTED_FAKE: "resolve",
    ArticleState.RESOLVED: "resolve",
}


def fuzz_sequence(seed, length=12):
    """Apply one random event sequence to a fresh engine.

    Returns a list of problems: undeclared exceptions or illegal state paths.
    """
    rng = random.Random(seed)
    ledger = Ledger("fuzz")
    reg = Registry(ledger)
    reg.register([Role.REPORTER], participant_id="rep")
    reg.register([Role.VALIDATOR], participant_id="notrep")
    for i in range(rng.randint(0, 1)):
        reg.register([Role.MACHINE], participant_id=f"m{i}")
    for i in range(rng.randint(1, 3)):
        reg.register([Role.JOURNALIST], participant_id=f"j{i}")
    for i in range(rng.randint(0, 3)):
        reg.register([Role.LOCAL], area_tags=[rng.choice(["north", "south"])], participant_id=f"l{i}")
    for i in range(rng.randint(0, 3)):
        reg.register([Role.VALIDATOR], area_tags=[rng.choice(["north", "south"])], participant_id=f"v{i}")
    chaos = _Chaos(rng)
    engine = Engine(
        reg,
        ledger,
        chaos.rate,
        chaos.believes,
        panel_spec=PanelSpec(n_dl=rng.randint(0, 1), n_journalist=1, n_local=rng.randint(0, 2)),
        rng=random.Random(seed),
    )

    problems = []
    for _ in range(length):
        ids = list(engine.articles) + ["a999999"]
        aid = rng.choice(ids)
        op = rng.choice(OPS)
        # mostly push an article forward so deep states get exercised
        if aid in engine.articles and rng.random() < 0.7:
            art = engine.articles[aid]
            op = NEXT_OP[art.state]
            if art.state is ArticleState.UNDER_VALIDATION and art.tally is not None:
                op = "decide"
        try:
            if op == "submit":
                engine.submit(
                    rng.choice(["rep", "rep", "notrep"]),
                    "t",
                    "b",
                    [rng.choice(["north", "south"])],
                    [],
                    rng.choice([0.0, 2.5, 5.0, rng.uniform(-1, 6)]),
                )
            elif op == "analyze":
                engine.run_analysis(aid, force_proceed=rng.random() < 0.5)
            elif op == "validate":
                engine.run_validation(aid)
            elif op == "decide":
                engine.decide_publication(aid)
            else:
                engine.resolve(aid, rng.choice(list(Truth)))
        except ProtocolError:
            pass
        except Exception as exc:  # anything undeclared is a finding
            problems.append(f"seed {seed}: {op} raised {type(exc).__name__}: {exc}")
    for art in engine.articles.values():
        if not legal_path(art.history):
            problems.append(f"seed {seed}: illegal path {[s.value for s in art.history]}")
    if not ledger.verify_chain().ok:
        problems.append(f"seed {seed}: ledger failed verification")
    return problems
