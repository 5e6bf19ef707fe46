"""Hashed TF-IDF features, title/body stance, and a logistic-regression analyzer."""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

from ..errors import DegenerateCorpus, DimensionMismatch
from .text import DEFAULT_MAX_DF, Document, DocumentFrequency, preprocess

DEFAULT_DIMS = 2**16
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_EPOCHS = 200

LABELS = {"fake": 0, "real": 1}


def hash_token(token: str, dims: int) -> tuple[int, float]:
    """Bucket index and sign for a token (signed feature hashing)."""
    h = int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")
    sign = -1.0 if h >> 63 else 1.0
    return h % dims, sign


def stance_score(doc: Document) -> float:
    """Cosine similarity between title and body term-frequency vectors."""
    return _cosine(Counter(doc.tokens_title), Counter(doc.tokens_body))


def _cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    dot = sum(v * b[k] for k, v in a.items() if k in b)
    norm = math.sqrt(sum(v * v for v in a.values()) * sum(v * v for v in b.values()))
    return min(1.0, dot / norm)


def idf(token: str, df_table: DocumentFrequency | None) -> float:
    if df_table is None:
        return 1.0
    return math.log((1 + df_table.n_docs) / (1 + df_table.counts.get(token, 0))) + 1.0


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector of length ``dims + 1``; the last coordinate is the stance score."""

    dims: int
    indices: np.ndarray
    values: np.ndarray

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dims + 1)
        out[self.indices] = self.values
        return out


def featurize(doc: Document, dims: int = DEFAULT_DIMS, df_table: DocumentFrequency | None = None) -> FeatureVector:
    buckets: dict[int, float] = {}
    for token, tf in sorted(Counter(doc.tokens_body).items()):
        bucket, sign = hash_token(token, dims)
        buckets[bucket] = buckets.get(bucket, 0.0) + sign * tf * idf(token, df_table)
    items = sorted((i, v) for i, v in buckets.items() if v != 0.0)
    norm = math.sqrt(math.fsum(v * v for _, v in items))
    indices = [i for i, _ in items]
    values = [v / norm for _, v in items] if norm > 0 else []
    stance = stance_score(doc)
    if stance:
        indices.append(dims)
        values.append(stance)
    return FeatureVector(dims, np.array(indices, dtype=np.int64), np.array(values, dtype=np.float64))


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_loss(w: np.ndarray, b: float, x: np.ndarray, y: int) -> float:
    """Logistic loss for one dense example; ``y`` is 1 for real and 0 for fake."""
    z = float(w @ x) + b
    return float(np.logaddexp(0.0, -z) if y else np.logaddexp(0.0, z))


def logistic_gradient(w: np.ndarray, b: float, x: np.ndarray, y: int) -> tuple[np.ndarray, float]:
    g = sigmoid(float(w @ x) + b) - y
    return g * x, g


@dataclass(frozen=True)
class TrainedModel:
    weights: np.ndarray
    bias: float
    df_table: DocumentFrequency
    dims: int
    train_seed: int
    max_df: float = DEFAULT_MAX_DF
    final_loss: float = float("nan")

    def __post_init__(self):
        if self.weights.shape != (self.dims + 1,):
            raise DimensionMismatch(f"weights have shape {self.weights.shape}, expected ({self.dims + 1},)")
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.bias)):
            raise ValueError("model weights must be finite")
        self.weights.setflags(write=False)

    def prepare(self, title: str, body: str) -> FeatureVector:
        return featurize(preprocess(title, body, self.df_table, self.max_df), self.dims, self.df_table)

    def predict_proba(self, features: FeatureVector) -> float:
        if features.dims != self.dims:
            raise DimensionMismatch(f"features have {features.dims} dims, model has {self.dims}")
        z = float(self.weights[features.indices] @ features.values) + self.bias
        return sigmoid(z)

    def to_json(self) -> dict:
        nz = np.flatnonzero(self.weights)
        return {
            "dims": self.dims,
            "bias": self.bias,
            "train_seed": self.train_seed,
            "max_df": self.max_df,
            "final_loss": self.final_loss,
            "weights": [[int(i), float(self.weights[i])] for i in nz],
            "df": self.df_table.to_json(),
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "TrainedModel":
        dims = int(obj["dims"])
        weights = np.zeros(dims + 1)
        for i, w in obj["weights"]:
            if not 0 <= int(i) <= dims:
                raise DimensionMismatch(f"weight index {i} outside model dimension {dims + 1}")
            weights[int(i)] = float(w)
        return cls(
            weights=weights,
            bias=float(obj["bias"]),
            df_table=DocumentFrequency.from_json(obj["df"]),
            dims=dims,
            train_seed=int(obj["train_seed"]),
            max_df=float(obj.get("max_df", DEFAULT_MAX_DF)),
            final_loss=float(obj.get("final_loss", float("nan"))),
        )

    def save(self, fh: TextIO) -> None:
        json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, fh: TextIO) -> "TrainedModel":
        return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class LabeledText:
    label: str
    title: str
    body: str

    @property
    def y(self) -> int:
        return LABELS[self.label]


def read_corpus(fh: TextIO) -> list[LabeledText]:
    """One JSON object per line with ``label`` (fake/real, optional), ``title`` and ``body``."""
    out = []
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        label = rec.get("label")
        if label is not None and label not in LABELS:
            raise ValueError(f"unknown label {label!r}")
        out.append(LabeledText(label, rec.get("title", ""), rec.get("body", "")))
    return out


def write_corpus(items: Iterable[LabeledText], fh: TextIO) -> None:
    for item in items:
        fh.write(json.dumps({"label": item.label, "title": item.title, "body": item.body}) + "\n")


def train(
    corpus: Sequence[LabeledText],
    learning_rate: float = DEFAULT_LEARNING_RATE,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    dims: int = DEFAULT_DIMS,
    max_df: float = DEFAULT_MAX_DF,
) -> TrainedModel:
    """Fit the logistic model by per-example gradient descent.

    Examples are visited in an order reshuffled every epoch by a generator
    seeded with ``seed``; weights start at zero, so the result is a pure
    function of the inputs.
    """
    labels = {item.label for item in corpus}
    if labels != {"fake", "real"}:
        raise DegenerateCorpus(f"need both classes in the corpus, got {sorted(map(str, labels))}")
    df_table = DocumentFrequency.from_texts((c.title, c.body) for c in corpus)
    feats = [featurize(preprocess(c.title, c.body, df_table, max_df), dims, df_table) for c in corpus]
    ys = [c.y for c in corpus]

    w = np.zeros(dims + 1)
    b = 0.0
    rng = random.Random(seed)
    order = list(range(len(corpus)))
    for _ in range(epochs):
        rng.shuffle(order)
        for k in order:
            f = feats[k]
            g = sigmoid(float(w[f.indices] @ f.values) + b) - ys[k]
            w[f.indices] -= learning_rate * g * f.values
            b -= learning_rate * g

    losses = []
    for f, y in zip(feats, ys):
        z = float(w[f.indices] @ f.values) + b
        losses.append(float(np.logaddexp(0.0, -z) if y else np.logaddexp(0.0, z)))
    return TrainedModel(w, b, df_table, dims, seed, max_df, math.fsum(losses) / len(losses))


def rating_from_probability(p_real: float) -> float:
    """Fake verdicts rate 0; real verdicts rate proportionally to confidence."""
    if p_real < 0.5:
        return 0.0
    return 5.0 * p_real


def classify_and_rate(model: TrainedModel, article: Any) -> tuple[float, float]:
    """``(p_real, rating)`` for anything with ``title`` and ``body`` attributes."""
    p = model.predict_proba(model.prepare(article.title, article.body))
    return p, rating_from_probability(p)


def accuracy(model: TrainedModel, items: Sequence[LabeledText]) -> float:
    if not items:
        return float("nan")
    hits = sum((classify_and_rate(model, it)[0] >= 0.5) == (it.y == 1) for it in items)
    return hits / len(items)
