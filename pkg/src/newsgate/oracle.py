"""Brute-force exact-arithmetic evaluator for the rating and credibility formulas.

Each formula is re-derived here with :class:`fractions.Fraction` on random
valid inputs and compared against the float implementation in
:mod:`newsgate.scoring` and :mod:`newsgate.participants`.  Nothing in this
module calls those implementations to produce an expected value.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction as Q

from . import participants as P
from . import scoring as S

TOLERANCE = 1e-12


@dataclass
class CheckResult:
    name: str
    cases: int
    max_abs_error: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= TOLERANCE

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.cases} cases, max |err| = {self.max_abs_error:.3e} ({self.seconds:.3f}s)"


# -- exact reference formulas -----------------------------------------------------


def exact_reporter_rating(lam, delta):
    return Q(lam) * Q(delta)


def exact_analyzer_rating(pairs):
    total = Q(0)
    for delta, lam in pairs:
        total += Q(delta) * Q(lam)
    return total / len(pairs)


def exact_validator_belief(eta_b, eta):
    return Q(eta_b, eta) * 5


def exact_total_score(r, a, v, w1, w2, w3):
    return (Q(r) * Q(w1) + Q(a) * Q(w2) + Q(v) * Q(w3)) / 5


def exact_reporter_credibility(delta, theta, fakes, genuine, growth=P.DEFAULT_GROWTH_RATE):
    delta = Q(delta)
    if fakes >= 1:
        value = delta / (delta + Q(theta) * Q(fakes, max(genuine, 1)))
    else:
        value = min(Q(1), delta + Q(growth) * (1 - delta))
    return min(Q(1), max(Q(0), value))


def exact_analyzer_credibility(tp, tn, fp, fn, history):
    accuracy = Q(tp + tn, tp + tn + fp + fn)
    agreement = sum((Q(h) for h in history), Q(0)) / len(history)
    return accuracy * agreement


# -- random valid inputs -------------------------------------------------------------


def _weights(rng: random.Random) -> tuple[float, float, float]:
    w1 = rng.random()
    w2 = rng.random() * (1.0 - w1)
    return w1, w2, 1.0 - w1 - w2


def _err(got: float, want: Q) -> float:
    return abs(float(Q(got) - want))


def _run(name: str, n: int, one_case) -> CheckResult:
    t0 = time.perf_counter()
    worst = max(one_case(i) for i in range(n))
    return CheckResult(name, n, worst, time.perf_counter() - t0)


def run_checks(n: int = 1000, seed: int = 0) -> list[CheckResult]:
    rng = random.Random(seed)
    results = []

    def reporter_case(_):
        lam, delta = rng.uniform(0, 5), rng.random()
        rec = S.RatingRecord("r", lam, delta, "a")
        return _err(S.reporter_rating(rec), exact_reporter_rating(lam, delta))

    def analyzer_case(_):
        k = rng.randint(1, 12)
        pairs = [(rng.random(), rng.uniform(0, 5)) for _ in range(k)]
        recs = [S.RatingRecord(f"x{j}", lam, d, "a") for j, (d, lam) in enumerate(pairs)]
        return _err(S.analyzer_rating(recs), exact_analyzer_rating(pairs))

    def belief_case(_):
        eta = rng.randint(1, 200)
        eta_b = rng.randint(0, eta)
        return _err(S.validator_belief(S.ValidationTally(eta, eta_b)), exact_validator_belief(eta_b, eta))

    def total_case(_):
        r, a, v = (rng.uniform(0, 5) for _ in range(3))
        w = _weights(rng)
        params = S.ScoringParams(*w)
        return _err(S.total_score(r, a, v, params), exact_total_score(r, a, v, *w))

    def reporter_cred_case(_):
        delta, theta = rng.random(), rng.uniform(0.01, 5)
        fakes, genuine = rng.randint(0, 10), rng.randint(0, 10)
        got = P.reporter_credibility(delta, theta, fakes, genuine)
        return _err(got, exact_reporter_credibility(delta, theta, fakes, genuine))

    def analyzer_cred_case(_):
        while True:
            counts = [rng.randint(0, 20) for _ in range(4)]
            if sum(counts) >= 1:
                break
        history = []
        for _ in range(rng.randint(1, 15)):
            eta = rng.randint(1, 30)
            history.append(rng.randint(0, eta) / eta)
        conf = P.Confusion(*counts)
        got = P.analyzer_credibility(conf, history)
        return _err(got, exact_analyzer_credibility(*counts, history))

    for name, fn in (
        ("reporter rating", reporter_case),
        ("analyzer rating", analyzer_case),
        ("validator belief", belief_case),
        ("total score", total_case),
        ("reporter credibility", reporter_cred_case),
        ("analyzer credibility", analyzer_cred_case),
    ):
        results.append(_run(name, n, fn))
    results.append(_worked_examples())
    return results


def _worked_examples() -> CheckResult:
    t0 = time.perf_counter()
    cases = [
        (S.reporter_rating(S.RatingRecord("r", 4, 0.5, "a")), Q(2)),
        (
            S.analyzer_rating([S.RatingRecord("x", 4, 0.5, "a"), S.RatingRecord("y", 2, 1.0, "a")]),
            Q(2),
        ),
        (S.validator_belief(S.ValidationTally(5, 3)), Q(3)),
        (S.total_score(2, 3, 4, S.ScoringParams(0.2, 0.5, 0.3)), Q(62, 100)),
        (S.total_score(5, 5, 5, S.ScoringParams()), Q(1)),
        (S.total_score(0, 0, 0, S.ScoringParams()), Q(0)),
        (P.reporter_credibility(0.5, 1, 1, 1), Q(1, 3)),
        (P.reporter_credibility(0.5, 1, 0, 1), Q(55, 100)),
        (P.reporter_credibility(0.5, 2, 3, 0), Q(1, 13)),
        (P.analyzer_credibility(P.Confusion(3, 2, 1, 0), [0.8]), Q(2, 3)),
        (P.analyzer_credibility(P.Confusion(4, 4, 0, 0), [1.0]), Q(1)),
        (P.analyzer_credibility(P.Confusion(0, 0, 2, 1), [0.9]), Q(0)),
    ]
    worst = max(_err(got, want) for got, want in cases)
    return CheckResult("worked examples", len(cases), worst, time.perf_counter() - t0)
