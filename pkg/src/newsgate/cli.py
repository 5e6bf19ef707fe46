"""Command-line entry point.

Exit codes: 0 success, 1 protocol or verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from functools import lru_cache
from pathlib import Path

from .classifier.model import TrainedModel, classify_and_rate, read_corpus, train
from .errors import ProtocolError
from .ledger import verify_export
from .oracle import run_checks
from .sim.config import ScenarioConfig
from .sim.runner import run_scenario, write_outputs


@lru_cache(maxsize=None)
def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="newsgate", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write metrics, trajectories and ledger")
    sim.add_argument("--config", required=True, type=Path)
    sim.add_argument("--out", required=True, type=Path)
    sim.add_argument("--seed", type=int, help="overrides the seed in the config file")

    ledger = sub.add_parser("ledger", help="ledger tools")
    ledger_sub = ledger.add_subparsers(dest="ledger_command", required=True)
    verify = ledger_sub.add_parser("verify", help="check a ledger export for tampering")
    verify.add_argument("file", type=Path)

    cls = sub.add_parser("classify", help="print p_real and rating for each input article")
    cls.add_argument("--model", required=True, type=Path)
    cls.add_argument("--input", required=True, type=Path)

    tr = sub.add_parser("train", help="fit a classifier on a labeled corpus file")
    tr.add_argument("--corpus", required=True, type=Path)
    tr.add_argument("--out", required=True, type=Path)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--epochs", type=int, default=200)
    tr.add_argument("--learning-rate", type=float, default=0.1)

    formulas = sub.add_parser("formulas", help="formula self-checks")
    formulas_sub = formulas.add_subparsers(dest="formulas_command", required=True)
    check = formulas_sub.add_parser("check", help="compare every formula against the exact oracle")
    check.add_argument("--cases", type=int, default=1000)
    check.add_argument("--seed", type=int, default=0)
    return p


def _simulate(args) -> int:
    config = ScenarioConfig.load(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    result = run_scenario(config)
    report = result.ledger.verify_chain()
    if not report.ok:
        print(f"ledger failed verification at height {report.first_corrupt_height}", file=sys.stderr)
        return 1
    paths = write_outputs(result, args.out)
    m = result.metrics
    print(f"fake_published_rate={m['fake_published_rate']} authentic_rejected_rate={m['authentic_rejected_rate']}")
    for path in paths.values():
        print(path)
    return 0


def _verify(args) -> int:
    report = verify_export(args.file.read_bytes())
    if report.ok:
        print(f"ok: {args.file}")
        return 0
    print(f"corrupt at height {report.first_corrupt_height}: {report.reason}")
    return 1


def _classify(args) -> int:
    with open(args.model) as fh:
        model = TrainedModel.load(fh)
    with open(args.input) as fh:
        items = read_corpus(fh)
    for item in items:
        p, lam = classify_and_rate(model, item)
        print(f"{p:.12g}\t{lam:.12g}")
    return 0


def _train(args) -> int:
    with open(args.corpus) as fh:
        corpus = read_corpus(fh)
    model = train(corpus, learning_rate=args.learning_rate, epochs=args.epochs, seed=args.seed)
    with open(args.out, "w") as fh:
        model.save(fh)
    print(f"final training loss {model.final_loss:.12g}")
    return 0


def _formulas(args) -> int:
    results = run_checks(args.cases, args.seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handlers = {
        "simulate": _simulate,
        "ledger": _verify,
        "classify": _classify,
        "train": _train,
        "formulas": _formulas,
    }
    try:
        return handlers[args.command](args)
    except (ProtocolError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
