"""Append-only hash-chained event ledger.

Every protocol event is a :class:`Transaction`.  Transactions are sealed into
:class:`Block` objects whose hash covers the height, the predecessor hash and a
digest of the canonically encoded transactions, so any change to a sealed
block is detectable by :meth:`Ledger.verify_chain`.

The flat-file form is one JSON object per line (one block per line) with
fields in a fixed order and lowercase hex digests.  :func:`verify_export`
checks a serialized file byte-for-byte: a line must re-serialize to exactly
the bytes it was read from, which makes encodings that parse to the same
values but differ on disk count as corruption too.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping

from .errors import EmptyBatch, InvalidTransaction, LedgerFormatError

DIGEST_SIZE = 32
ZERO_HASH = bytes(DIGEST_SIZE)
_U64_MAX = 2**64 - 1


class TxKind(str, Enum):
    REGISTER = "Register"
    SUBMIT = "Submit"
    ANALYZER_RATING = "AnalyzerRating"
    ANALYZER_GATE = "AnalyzerGate"
    VALIDATOR_BELIEF = "ValidatorBelief"
    PUBLICATION_DECISION = "PublicationDecision"
    RESOLUTION = "Resolution"
    CREDIBILITY_UPDATE = "CredibilityUpdate"


_KIND_CODE = {kind: i for i, kind in enumerate(TxKind)}

# payload keys with value-range constraints
RATING_KEYS = frozenset({"lambda", "reporter_lambda", "score_R", "score_A", "score_V"})
UNIT_KEYS = frozenset({"credibility", "credibility_snapshot", "old", "new", "score_total", "p_real"})
COUNT_KEYS = frozenset({"eta", "eta_b", "eta_a"})


_SCALARS = frozenset({type(None), bool, int, float, str})


def _freeze(value: Any) -> Any:
    if type(value) in _SCALARS:
        return value
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    if isinstance(value, Enum):
        return value.value
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise TypeError(f"unsupported payload value type: {type(value).__name__}")


@dataclass(frozen=True)
class Transaction:
    tx_id: int
    kind: TxKind
    article_id: str | None = None
    actor: str | None = None
    payload: Mapping[str, Any] = field(default_factory=dict)
    timestamp: int = 0

    def __post_init__(self):
        if type(self.kind) is not TxKind:
            object.__setattr__(self, "kind", TxKind(self.kind))
        frozen = {str(k): _freeze(v) for k, v in sorted(self.payload.items())}
        object.__setattr__(self, "payload", MappingProxyType(frozen))

    def validate(self) -> None:
        """Raise :class:`InvalidTransaction` if any field is out of range."""
        if not isinstance(self.tx_id, int) or not 0 <= self.tx_id <= _U64_MAX:
            raise InvalidTransaction(f"tx_id out of range: {self.tx_id!r}", self.tx_id)
        if not isinstance(self.timestamp, int) or not 0 <= self.timestamp <= _U64_MAX:
            raise InvalidTransaction(f"timestamp out of range: {self.timestamp!r}", self.tx_id)
        for key, value in self.payload.items():
            if isinstance(value, int) and not isinstance(value, bool) and not -(2**63) <= value < 2**63:
                raise InvalidTransaction(f"{self.kind.value}.{key} overflows 64 bits", self.tx_id)
            if isinstance(value, float) and not math.isfinite(value):
                raise InvalidTransaction(f"{self.kind.value}.{key} is not finite", self.tx_id)
            if key in RATING_KEYS and value is not None and not 0.0 <= value <= 5.0:
                raise InvalidTransaction(f"{self.kind.value}.{key}={value!r} outside [0, 5]", self.tx_id)
            if key in UNIT_KEYS and value is not None and not 0.0 <= value <= 1.0:
                raise InvalidTransaction(f"{self.kind.value}.{key}={value!r} outside [0, 1]", self.tx_id)
            if key in COUNT_KEYS and (not isinstance(value, int) or value < 0):
                raise InvalidTransaction(f"{self.kind.value}.{key}={value!r} is not a count", self.tx_id)

    def encode(self) -> bytes:
        """Canonical byte encoding used for hashing."""
        out = bytearray()
        out += _TX_HEAD.pack(self.tx_id, _KIND_CODE[self.kind])
        _put_optional_str(out, self.article_id)
        _put_optional_str(out, self.actor)
        out += _U64.pack(self.timestamp)
        out += _U32.pack(len(self.payload))
        for key, value in self.payload.items():
            _put_str(out, key)
            _put_value(out, value)
        return bytes(out)

    def to_json(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "kind": self.kind.value,
            "article_id": self.article_id,
            "actor": self.actor,
            "timestamp": self.timestamp,
            "payload": {k: _thaw(v) for k, v in self.payload.items()},
        }


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    return value


_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_I64 = struct.Struct("<q")
_F64 = struct.Struct("<d")
_TX_HEAD = struct.Struct("<QB")


def _put_str(out: bytearray, s: str) -> None:
    raw = s.encode("utf-8")
    out += _U32.pack(len(raw))
    out += raw


def _put_optional_str(out: bytearray, s: str | None) -> None:
    if s is None:
        out += b"\x00"
    else:
        out += b"\x01"
        _put_str(out, s)


def _put_value(out: bytearray, value: Any) -> None:
    t = type(value)
    if t is float:
        out += b"f" + _F64.pack(value)
    elif t is str:
        out += b"s"
        _put_str(out, value)
    elif value is None:
        out += b"n"
    elif isinstance(value, bool):
        out += b"b" + (b"\x01" if value else b"\x00")
    elif isinstance(value, int):
        out += b"i" + _I64.pack(value)
    elif isinstance(value, float):
        out += b"f" + _F64.pack(value)
    elif isinstance(value, str):
        out += b"s"
        _put_str(out, value)
    elif isinstance(value, tuple):
        out += b"l" + _U32.pack(len(value))
        for v in value:
            _put_value(out, v)
    else:  # pragma: no cover - _freeze rejects everything else
        raise TypeError(type(value))


def hash_transactions(transactions: Iterable[Transaction]) -> bytes:
    txs = list(transactions)
    h = hashlib.sha256()
    h.update(_U32.pack(len(txs)))
    for tx in txs:
        enc = tx.encode()
        h.update(_U32.pack(len(enc)))
        h.update(enc)
    return h.digest()


def genesis_txs_hash(chain_id: str) -> bytes:
    out = bytearray(b"genesis")
    _put_str(out, chain_id)
    return hashlib.sha256(bytes(out)).digest()


def hash_header(height: int, prev_hash: bytes, txs_hash: bytes) -> bytes:
    return hashlib.sha256(_U64.pack(height) + prev_hash + txs_hash).digest()


@dataclass(frozen=True)
class Block:
    height: int
    prev_hash: bytes
    txs_hash: bytes
    transactions: tuple[Transaction, ...]
    block_hash: bytes

    @classmethod
    def seal(cls, height: int, prev_hash: bytes, transactions: Iterable[Transaction]) -> "Block":
        txs = tuple(transactions)
        txs_hash = hash_transactions(txs)
        return cls(height, prev_hash, txs_hash, txs, hash_header(height, prev_hash, txs_hash))


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    first_corrupt_height: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class Ledger:
    """Single-writer append-only block store.

    Writers either call :meth:`append_block` with fully formed transactions or
    use :meth:`emit`, which assigns the next ``tx_id`` and either seals the
    transaction on its own or, inside a :meth:`batch` block, defers sealing so
    that all transactions of one lifecycle transition share a block.
    """

    def __init__(self, chain_id: str = ""):
        self.chain_id = chain_id
        genesis_hash = genesis_txs_hash(chain_id)
        self._blocks: list[Block] = [
            Block(0, ZERO_HASH, genesis_hash, (), hash_header(0, ZERO_HASH, genesis_hash))
        ]
        self._next_tx_id = 0
        self._pending: list[Transaction] | None = None
        self._write_lock = threading.Lock()
        self.tick = 0

    # -- reading -----------------------------------------------------------

    @property
    def blocks(self) -> tuple[Block, ...]:
        return tuple(self._blocks)

    @property
    def height(self) -> int:
        return len(self._blocks) - 1

    @property
    def next_tx_id(self) -> int:
        return self._next_tx_id

    def __len__(self) -> int:
        return len(self._blocks)

    def tip_hash(self) -> bytes:
        return self._blocks[-1].block_hash

    def transactions(self) -> Iterator[Transaction]:
        for block in tuple(self._blocks):
            yield from block.transactions

    def query(
        self,
        kind: TxKind | str | None = None,
        article_id: str | None = None,
        actor: str | None = None,
    ) -> list[Transaction]:
        """Return all matching transactions in ``tx_id`` order."""
        kind = TxKind(kind) if kind is not None else None
        return [
            tx
            for tx in self.transactions()
            if (kind is None or tx.kind is kind)
            and (article_id is None or tx.article_id == article_id)
            and (actor is None or tx.actor == actor)
        ]

    # -- writing -----------------------------------------------------------

    def append_block(self, transactions: Iterable[Transaction]) -> Block:
        txs = tuple(transactions)
        if not txs:
            raise EmptyBatch("cannot seal an empty block")
        with self._write_lock:
            expected = self._next_tx_id
            for tx in txs:
                tx.validate()
                if tx.tx_id != expected:
                    raise InvalidTransaction(
                        f"tx_id {tx.tx_id} breaks contiguity (expected {expected})", tx.tx_id
                    )
                expected += 1
            tip = self._blocks[-1]
            block = Block.seal(tip.height + 1, tip.block_hash, txs)
            self._blocks.append(block)
            self._next_tx_id = expected
        return block

    def emit(
        self,
        kind: TxKind | str,
        *,
        article_id: str | None = None,
        actor: str | None = None,
        payload: Mapping[str, Any] | None = None,
        timestamp: int | None = None,
    ) -> Transaction:
        pending = self._pending
        tx_id = self._next_tx_id + (len(pending) if pending is not None else 0)
        tx = Transaction(
            tx_id=tx_id,
            kind=TxKind(kind),
            article_id=article_id,
            actor=actor,
            payload=payload or {},
            timestamp=self.tick if timestamp is None else timestamp,
        )
        tx.validate()
        if pending is None:
            self.append_block([tx])
        else:
            pending.append(tx)
        return tx

    @contextmanager
    def batch(self):
        """Collect emitted transactions and seal them as one block on exit.

        Nested calls join the outer batch.  If the body raises, the collected
        transactions are discarded and no block is sealed.
        """
        if self._pending is not None:
            yield self
            return
        self._pending = []
        try:
            yield self
        except BaseException:
            self._pending = None
            raise
        pending, self._pending = self._pending, None
        if pending:
            self.append_block(pending)

    # -- verification ------------------------------------------------------

    def verify_chain(self) -> VerificationReport:
        return verify_blocks(self._blocks, self.chain_id)

    # -- export / import ---------------------------------------------------

    def export_lines(self) -> list[str]:
        return [block_to_line(b, self.chain_id if b.height == 0 else None) for b in self._blocks]

    def export_bytes(self) -> bytes:
        return "".join(line + "\n" for line in self.export_lines()).encode("utf-8")

    def export(self, path: str | Path) -> None:
        Path(path).write_bytes(self.export_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Ledger":
        """Rebuild a ledger from its export; raises if the file is malformed or corrupt."""
        chain_id, blocks = _parse_export(data)
        report = verify_blocks(blocks, chain_id)
        if not report.ok:
            raise LedgerFormatError(
                f"corrupt ledger at height {report.first_corrupt_height}: {report.reason}"
            )
        ledger = cls(chain_id)
        ledger._blocks = list(blocks)
        ledger._next_tx_id = sum(len(b.transactions) for b in blocks)
        if blocks[-1].transactions:
            ledger.tick = blocks[-1].transactions[-1].timestamp
        return ledger

    @classmethod
    def load(cls, path: str | Path) -> "Ledger":
        return cls.from_bytes(Path(path).read_bytes())


def _check_block(block: Block, prev: Block | None, chain_id: str, next_tx: int) -> tuple[str | None, int]:
    """Check one block against its predecessor; returns (problem, next expected tx_id)."""
    h = 0 if prev is None else prev.height + 1
    if block.height != h:
        return "height out of sequence", next_tx
    if prev is None:
        if block.prev_hash != ZERO_HASH:
            return "genesis prev_hash is not zero", next_tx
        if block.transactions:
            return "genesis carries transactions", next_tx
        if block.txs_hash != genesis_txs_hash(chain_id):
            return "genesis digest mismatch", next_tx
    else:
        if block.prev_hash != prev.block_hash:
            return "prev_hash does not link to predecessor", next_tx
        if not block.transactions:
            return "empty non-genesis block", next_tx
        for tx in block.transactions:
            if tx.tx_id != next_tx:
                return f"tx_id {tx.tx_id} out of sequence", next_tx
            try:
                tx.validate()
            except InvalidTransaction as exc:
                return str(exc), next_tx
            next_tx += 1
        if block.txs_hash != hash_transactions(block.transactions):
            return "transaction digest mismatch", next_tx
    if block.block_hash != hash_header(block.height, block.prev_hash, block.txs_hash):
        return "block hash mismatch", next_tx
    return None, next_tx


def verify_blocks(blocks: list[Block] | tuple[Block, ...], chain_id: str) -> VerificationReport:
    if not blocks:
        return VerificationReport(False, 0, "no genesis block")
    prev = None
    next_tx = 0
    for h, block in enumerate(blocks):
        problem, next_tx = _check_block(block, prev, chain_id, next_tx)
        if problem:
            return VerificationReport(False, h, problem)
        prev = block
    return VerificationReport(True)


# -- flat-file format ----------------------------------------------------------

_BLOCK_FIELDS = ("height", "prev_hash", "txs_hash", "block_hash", "transactions")
_TX_FIELDS = ("tx_id", "kind", "article_id", "actor", "timestamp", "payload")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True, allow_nan=False)


def block_to_line(block: Block, chain_id: str | None = None) -> str:
    obj = {
        "height": block.height,
        "prev_hash": block.prev_hash.hex(),
        "txs_hash": block.txs_hash.hex(),
        "block_hash": block.block_hash.hex(),
        "transactions": [tx.to_json() for tx in block.transactions],
    }
    if chain_id is not None:
        obj["chain_id"] = chain_id
    return canonical_json(obj)


def _hex_digest(value: Any) -> bytes:
    if not isinstance(value, str) or len(value) != 2 * DIGEST_SIZE:
        raise LedgerFormatError("digest must be 64 hex characters")
    if value != value.lower():
        raise LedgerFormatError("digest must be lowercase hex")
    try:
        return bytes.fromhex(value)
    except ValueError as exc:
        raise LedgerFormatError(f"digest is not hex: {exc}") from exc


def _tx_from_json(obj: Any) -> Transaction:
    if not isinstance(obj, dict) or tuple(obj) != _TX_FIELDS:
        raise LedgerFormatError("transaction fields are not in canonical order")
    if not isinstance(obj["payload"], dict):
        raise LedgerFormatError("payload must be an object")
    if list(obj["payload"]) != sorted(obj["payload"]):
        raise LedgerFormatError("payload keys are not sorted")
    for key in ("tx_id", "timestamp"):
        if type(obj[key]) is not int:
            raise LedgerFormatError(f"{key} must be an integer")
    for key in ("article_id", "actor"):
        if obj[key] is not None and not isinstance(obj[key], str):
            raise LedgerFormatError(f"{key} must be a string or null")
    try:
        return Transaction(
            tx_id=obj["tx_id"],
            kind=TxKind(obj["kind"]),
            article_id=obj["article_id"],
            actor=obj["actor"],
            payload=obj["payload"],
            timestamp=obj["timestamp"],
        )
    except (TypeError, ValueError) as exc:
        raise LedgerFormatError(str(exc)) from exc


def _block_from_line(line: str, height: int) -> tuple[Block, str | None]:
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise LedgerFormatError(f"line {height}: not valid JSON") from exc
    expected = _BLOCK_FIELDS + (("chain_id",) if height == 0 else ())
    if not isinstance(obj, dict) or tuple(obj) != expected:
        raise LedgerFormatError(f"line {height}: block fields are not in canonical order")
    if type(obj["height"]) is not int or not isinstance(obj["transactions"], list):
        raise LedgerFormatError(f"line {height}: malformed block")
    chain_id = obj.get("chain_id")
    if height == 0 and not isinstance(chain_id, str):
        raise LedgerFormatError("genesis chain_id must be a string")
    block = Block(
        height=obj["height"],
        prev_hash=_hex_digest(obj["prev_hash"]),
        txs_hash=_hex_digest(obj["txs_hash"]),
        transactions=tuple(_tx_from_json(t) for t in obj["transactions"]),
        block_hash=_hex_digest(obj["block_hash"]),
    )
    # payload keys were checked to be sorted, so this equals block_to_line(block)
    if canonical_json(obj) != line:
        raise LedgerFormatError(f"line {height}: not in canonical encoding")
    return block, chain_id


def _split_lines(data: bytes) -> list[str]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LedgerFormatError("file is not valid UTF-8") from exc
    if not text.endswith("\n"):
        raise LedgerFormatError("file must end with a newline")
    return text[:-1].split("\n")


def _parse_export(data: bytes) -> tuple[str, list[Block]]:
    lines = _split_lines(data)
    chain_id = ""
    blocks = []
    for h, line in enumerate(lines):
        block, cid = _block_from_line(line, h)
        if h == 0:
            chain_id = cid
        blocks.append(block)
    return chain_id, blocks


def verify_export(data: bytes) -> VerificationReport:
    """Verify a serialized ledger; any parse or encoding problem is a corruption report.

    Lines are checked in order and the first failure is reported: a change to
    one line can never invalidate the lines before it.
    """
    try:
        lines = _split_lines(data)
    except LedgerFormatError as exc:
        # Undecodable bytes: locate the offending line by byte offset.
        return VerificationReport(False, _line_of_bad_bytes(data), str(exc))
    if not lines:
        return VerificationReport(False, 0, "no genesis block")
    chain_id = ""
    prev = None
    next_tx = 0
    for h, line in enumerate(lines):
        try:
            block, cid = _block_from_line(line, h)
        except LedgerFormatError as exc:
            return VerificationReport(False, h, str(exc))
        if h == 0:
            chain_id = cid
        problem, next_tx = _check_block(block, prev, chain_id, next_tx)
        if problem:
            return VerificationReport(False, h, problem)
        prev = block
    return VerificationReport(True)


def _line_of_bad_bytes(data: bytes) -> int:
    if not data.endswith(b"\n"):
        return max(data.count(b"\n"), 0)
    for h, raw in enumerate(data.split(b"\n")):
        try:
            raw.decode("utf-8")
        except UnicodeDecodeError:
            return h
    return 0
