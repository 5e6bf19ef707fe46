"""Drive a full scenario through the protocol and collect metrics."""

from __future__ import annotations

import heapq
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..classifier.model import LabeledText, TrainedModel, accuracy, train
from ..errors import DegenerateCorpus
from ..ledger import Ledger, TxKind
from ..lifecycle import ArticleState, Engine, NewsArticle, content_digest
from ..participants import Registry, Role, credibility_trajectories, write_trajectories_csv
from ..scoring import AnalysisGate, Truth
from .agents import HumanAnalyzer, MachineAnalyzer, ReporterAgent, ValidatorAgent, derive_rng
from .config import ScenarioConfig
from .corpus import generate_article

log = logging.getLogger(__name__)

OUTPUT_FILES = ("metrics.json", "trajectories.csv", "ledger.jsonl")


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    metrics: dict
    ledger: Ledger
    engine: Engine
    authorship: dict[str, str]
    cohorts: dict[str, str]
    bootstrap_ids: list[str] = field(default_factory=list)
    model: TrainedModel | None = None

    @property
    def trajectories(self) -> list[tuple[int, str, float]]:
        return credibility_trajectories(self.ledger)


def _round12(x):
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round12(v) for v in x]
    return x


def _rate(num: int, den: int) -> float:
    return num / den if den else 0.0


class _Population:
    """Registers the roster and routes provider calls to per-participant agents."""

    def __init__(self, config: ScenarioConfig, registry: Registry):
        self.reporters: dict[str, ReporterAgent] = {}
        self.analyzers: dict[str, HumanAnalyzer] = {}
        self.validators: dict[str, ValidatorAgent] = {}
        self.machine = MachineAnalyzer()
        self.machine_ids: list[str] = []
        self.cohorts: dict[str, str] = {}
        seed = config.seed
        spec = config.corpus
        placement = derive_rng(seed, "placement")

        for cohort in config.reporters:
            for _ in range(cohort.count):
                p = registry.register([Role.REPORTER])
                self.reporters[p.id] = ReporterAgent(cohort, derive_rng(seed, f"agent:{p.id}"))
                self.cohorts[p.id] = f"reporter/{cohort.name}"
        for _ in range(config.machine_analyzers):
            p = registry.register([Role.MACHINE])
            self.machine_ids.append(p.id)
            self.cohorts[p.id] = "machine"
        for cohort in config.journalists:
            for _ in range(cohort.count):
                p = registry.register([Role.JOURNALIST])
                self.analyzers[p.id] = HumanAnalyzer(cohort, derive_rng(seed, f"agent:{p.id}"))
                self.cohorts[p.id] = f"journalist/{cohort.name}"
        for cohort in config.locals:
            for _ in range(cohort.count):
                domains = list(spec.domains)
                placement.shuffle(domains)
                p = registry.register(
                    [Role.LOCAL],
                    area_tags=[placement.choice(spec.areas)],
                    domain_tags=domains[: config.local_tags_per_analyzer],
                )
                self.analyzers[p.id] = HumanAnalyzer(cohort, derive_rng(seed, f"agent:{p.id}"))
                self.cohorts[p.id] = f"local/{cohort.name}"
        for cohort in config.validators:
            for _ in range(cohort.count):
                p = registry.register([Role.VALIDATOR], domain_tags=spec.domains)
                self.validators[p.id] = ValidatorAgent(cohort, derive_rng(seed, f"agent:{p.id}"))
                self.cohorts[p.id] = f"validator/{cohort.name}"

    def rate(self, participant, article) -> float:
        if Role.MACHINE in participant.roles:
            return self.machine.rate(article)
        return self.analyzers[participant.id].rate(article)

    def believes(self, participant, article) -> bool:
        return self.validators[participant.id].believes(article)


def training_corpus(ledger: Ledger, articles: dict[str, NewsArticle]) -> list[LabeledText]:
    """Labeled texts for every resolved article, in ledger order.

    The ledger holds labels and content digests; the text itself is kept off
    chain, so each text is checked against its submitted digest.
    """
    digests = {tx.article_id: tx.payload["content_digest"] for tx in ledger.query(TxKind.SUBMIT)}
    corpus = []
    for tx in ledger.query(TxKind.RESOLUTION):
        art = articles[tx.article_id]
        if content_digest(art.title, art.body) != digests[tx.article_id]:
            raise ValueError(f"off-chain text for {tx.article_id} does not match its digest")
        label = "fake" if tx.payload["truth"] == Truth.FAKE.value else "real"
        corpus.append(LabeledText(label, art.title, art.body))
    return corpus


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    config.validate()
    ledger = Ledger(chain_id=f"{config.name}:{config.seed}")
    registry = Registry(ledger, growth_rate=config.growth_rate)
    with ledger.batch():
        pop = _Population(config, registry)

    engine = Engine(
        registry,
        ledger,
        rating_provider=pop.rate,
        belief_provider=pop.believes,
        params=config.scoring,
        panel_spec=replace(config.panel, n_dl=0),
        rng=derive_rng(config.seed, "engine"),
        max_validators=config.max_validators,
    )
    author_rng = derive_rng(config.seed, "authors")
    text_rng = derive_rng(config.seed, "corpus")
    reporter_ids = sorted(pop.reporters)
    authorship: dict[str, str] = {}
    bootstrap_ids: list[str] = []
    pending: list[tuple[int, int, str]] = []
    model = None
    training_loss = float("nan")

    def resolve_due(now: int) -> None:
        while pending and pending[0][0] <= now:
            due, _, aid = heapq.heappop(pending)
            ledger.tick = due
            engine.resolve(aid, engine.articles[aid].truth)

    total = config.bootstrap_articles + config.article_count
    for i in range(total):
        tick = i + 1
        resolve_due(tick)
        ledger.tick = tick
        bootstrap = i < config.bootstrap_articles

        if i == config.bootstrap_articles and config.machine_analyzers:
            corpus = training_corpus(ledger, engine.articles)
            try:
                model = train(
                    corpus,
                    learning_rate=config.classifier.learning_rate,
                    epochs=config.classifier.epochs,
                    seed=config.seed,
                    dims=config.classifier.dims,
                    max_df=config.classifier.max_df,
                )
                pop.machine.model = model
                training_loss = model.final_loss
            except DegenerateCorpus:
                labels = {c.label for c in corpus}
                pop.machine.constant_p_real = 1.0 if labels == {"real"} else 0.0
                log.warning("bootstrap history holds one class only; machine analyzer uses a constant verdict")
            engine.panel_spec = config.panel
        elif i == config.bootstrap_articles:
            engine.panel_spec = config.panel

        reporter_id = author_rng.choice(reporter_ids)
        truth, lam = pop.reporters[reporter_id].next_story()
        text = generate_article(config.corpus, truth, text_rng)
        article = engine.submit(reporter_id, text.title, text.body, [text.area], [text.domain], lam)
        article.truth = truth
        authorship[article.article_id] = reporter_id

        engine.run_analysis(article.article_id, force_proceed=bootstrap)
        if article.state is ArticleState.UNDER_VALIDATION:
            engine.run_validation(article.article_id)
            engine.decide_publication(article.article_id)
        if bootstrap:
            bootstrap_ids.append(article.article_id)
            engine.resolve(article.article_id, truth)
        else:
            heapq.heappush(pending, (tick + config.resolution_delay, i, article.article_id))
    resolve_due(float("inf"))

    result = ScenarioResult(
        config=config,
        metrics={},
        ledger=ledger,
        engine=engine,
        authorship=authorship,
        cohorts=pop.cohorts,
        bootstrap_ids=bootstrap_ids,
        model=model,
    )
    result.metrics = compute_metrics(result, training_loss)
    return result


def compute_metrics(result: ScenarioResult, training_loss: float = float("nan")) -> dict:
    engine, config = result.engine, result.config
    skip = set(result.bootstrap_ids)
    scored = [a for aid, a in engine.articles.items() if aid not in skip]

    terminal = (ArticleState.REJECTED_AT_ANALYSIS, ArticleState.REJECTED_FAKE, ArticleState.PUBLISHED)
    decisions = {s.value: 0 for s in terminal}
    fake_total = authentic_total = fake_published = authentic_rejected = 0
    for art in scored:
        decision = art.history[-2] if art.state is ArticleState.RESOLVED else art.state
        decisions[decision.value] += 1
        if art.truth is Truth.FAKE:
            fake_total += 1
            fake_published += decision is ArticleState.PUBLISHED
        else:
            authentic_total += 1
            authentic_rejected += decision is not ArticleState.PUBLISHED

    by_cohort: dict[str, list[float]] = {}
    for pid, cohort in result.cohorts.items():
        by_cohort.setdefault(cohort, []).append(engine.registry.get(pid).credibility)
    mean_cred = {c: math.fsum(v) / len(v) for c, v in sorted(by_cohort.items())}

    heldout = float("nan")
    if result.model is not None and scored:
        texts = [LabeledText("fake" if a.truth is Truth.FAKE else "real", a.title, a.body) for a in scored]
        heldout = accuracy(result.model, texts)

    metrics = {
        "seed": config.seed,
        "article_count": len(scored),
        "bootstrap_articles": len(skip),
        "fake_total": fake_total,
        "authentic_total": authentic_total,
        "fake_published": fake_published,
        "authentic_rejected": authentic_rejected,
        "fake_published_rate": _rate(fake_published, fake_total),
        "authentic_rejected_rate": _rate(authentic_rejected, authentic_total),
        "gate_decisions": decisions,
        "mean_final_credibility": mean_cred,
        "classifier_heldout_accuracy": heldout,
        "classifier_training_loss": training_loss,
        "ledger_height": result.ledger.height,
        "ledger_transactions": result.ledger.next_tx_id,
        "ledger_tip_hash": result.ledger.tip_hash().hex(),
        "analyzer_gate_rejections": sum(
            1 for tx in result.ledger.query(TxKind.ANALYZER_GATE)
            if tx.article_id not in skip and tx.payload["decision"] == AnalysisGate.REJECTED.value
        ),
    }
    return _round12(metrics)


def metrics_json(metrics: dict) -> str:
    return json.dumps(metrics, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(result: ScenarioResult, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    write_trajectories_csv(result.trajectories, buf)
    payloads = {
        "metrics.json": metrics_json(result.metrics).encode(),
        "trajectories.csv": buf.getvalue().encode(),
        "ledger.jsonl": result.ledger.export_bytes(),
    }
    paths = {}
    for name in OUTPUT_FILES:
        paths[name] = out / name
        _atomic_write(paths[name], payloads[name])
    return paths
