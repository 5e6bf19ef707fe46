"""Tokenization, stop-word and frequency filtering, and a small stemmer."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

DEFAULT_MAX_DF = 0.9

STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he her here hers herself him
    himself his how i if in into is it its itself just me more most my myself no
    nor not now of off on once only or other our ours ourselves out over own same
    she should so some such than that the their theirs them themselves then there
    these they this those through to too under until up very was we were what when
    where which while who whom why will with would you your yours yourself
    yourselves also may might must shall s t d ll m o re ve y
    """.split()
)

# irregular forms that suffix stripping cannot reach
IRREGULAR = {
    "saw": "see",
    "seen": "see",
    "sees": "see",
    "seeing": "see",
    "went": "go",
    "gone": "go",
    "goes": "go",
    "ran": "run",
    "said": "say",
    "says": "say",
    "made": "make",
    "took": "take",
    "taken": "take",
    "told": "tell",
    "found": "find",
    "children": "child",
    "men": "man",
    "women": "woman",
    "people": "person",
    "better": "good",
    "best": "good",
    "worse": "bad",
    "worst": "bad",
    "news": "news",
}

_SUFFIXES = (
    ("sses", "ss"),
    ("ies", "y"),
    ("xes", "x"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("ingly", ""),
    ("edly", ""),
    ("ing", ""),
    ("ed", ""),
    ("ly", ""),
    ("s", ""),
)
_MIN_STEM = 3
_TOKEN_RE = re.compile(r"[^\W_]+")


def _strip_once(word: str) -> str:
    if word in IRREGULAR:
        return IRREGULAR[word]
    for suffix, repl in _SUFFIXES:
        if not word.endswith(suffix):
            continue
        if suffix == "s" and word[-2:-1] in ("s", "u", "i"):
            return word
        stem = word[: len(word) - len(suffix)] + repl
        if len(stem) < _MIN_STEM:
            return word
        if suffix in ("ing", "ed", "ingly", "edly") and len(stem) > _MIN_STEM:
            if stem[-1] == stem[-2] and stem[-1] not in "aeiouylsz":
                stem = stem[:-1]
        return stem
    return word


def stem(word: str) -> str:
    """Reduce a lowercase word to its base form.

    Rules are applied until nothing changes, so ``stem(stem(w)) == stem(w)``.
    """
    seen = {word}
    while True:
        nxt = _strip_once(word)
        if nxt == word or nxt in seen:
            return word
        seen.add(nxt)
        word = nxt


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def base_tokens(text: str) -> list[str]:
    """Tokens after stop-word removal and stemming, before frequency filtering."""
    out = []
    for tok in tokenize(text):
        if tok in STOP_WORDS:
            continue
        base = stem(tok)
        if base in STOP_WORDS:
            continue
        out.append(base)
    return out


@dataclass(frozen=True)
class DocumentFrequency:
    """Fraction of corpus documents containing each base token."""

    n_docs: int
    counts: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def from_texts(cls, texts: Iterable[tuple[str, str]]) -> "DocumentFrequency":
        counts: Counter[str] = Counter()
        n = 0
        for title, body in texts:
            n += 1
            counts.update(set(base_tokens(title)) | set(base_tokens(body)))
        return cls(n, dict(sorted(counts.items())))

    def df(self, token: str) -> float:
        if self.n_docs == 0:
            return 0.0
        return self.counts.get(token, 0) / self.n_docs

    def to_json(self) -> dict:
        return {"n_docs": self.n_docs, "counts": dict(self.counts)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DocumentFrequency":
        return cls(int(obj["n_docs"]), {str(k): int(v) for k, v in obj["counts"].items()})


@dataclass(frozen=True)
class Document:
    title: str
    body: str
    tokens_title: tuple[str, ...] = ()
    tokens_body: tuple[str, ...] = ()


def filter_tokens(text: str, df_table: DocumentFrequency | None, max_df: float = DEFAULT_MAX_DF) -> list[str]:
    tokens = base_tokens(text)
    if df_table is None:
        return tokens
    return [t for t in tokens if df_table.df(t) <= max_df]


def preprocess(
    title: str,
    body: str,
    df_table: DocumentFrequency | None = None,
    max_df: float = DEFAULT_MAX_DF,
) -> Document:
    return Document(
        title=title,
        body=body,
        tokens_title=tuple(filter_tokens(title, df_table, max_df)),
        tokens_body=tuple(filter_tokens(body, df_table, max_df)),
    )
