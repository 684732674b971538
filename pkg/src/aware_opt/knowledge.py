"""Compiler knowledge base: empirical sequences under symbolic constraints, with a negative store."""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .ir.features import FeatureVector
from .passes import PassCatalog, load_catalog, parse_flags, render_flags, validate_sequence

SCHEMA_VERSION = 1
DEFAULT_EPSILON = 0.0
DEFAULT_ALPHA = 0.5


class KnowledgeBaseError(Exception):
    pass


class InvalidSequence(KnowledgeBaseError):
    pass


class NegativeCollision(KnowledgeBaseError):
    pass


class NotNegative(KnowledgeBaseError):
    pass


class EmptyStore(KnowledgeBaseError):
    pass


class SchemaVersionMismatch(KnowledgeBaseError):
    pass


@dataclass(frozen=True)
class EmpiricalEntry:
    features: FeatureVector
    sequence: tuple[int, ...]
    effect: float  # signed size improvement, e.g. improvement over -Oz
    provenance: str = ""
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequence", tuple(self.sequence))
        if not -1.0 <= self.effect <= 1.0:
            raise ValueError(f"effect must lie in [-1, 1], got {self.effect}")


@dataclass(frozen=True)
class NegativeEntry:
    sequence: tuple[int, ...]
    score: float
    threshold_at_insert: float


@dataclass(frozen=True)
class RankedEntry:
    entry: EmpiricalEntry
    similarity: float
    rank_score: float


@dataclass(frozen=True)
class RetrievalResult:
    ranked: tuple[RankedEntry, ...]
    k: int


def similarity(a: FeatureVector, b: FeatureVector) -> float:
    """Cosine similarity of log1p-scaled counts, mapped from [-1, 1] onto [0, 1].

    Two all-zero vectors are identical programs (1.0); an all-zero vector
    against a non-zero one has no direction to compare and scores 0.5.
    """
    xa = [math.log1p(v) for v in a]
    xb = [math.log1p(v) for v in b]
    na = math.sqrt(sum(x * x for x in xa))
    nb = math.sqrt(sum(x * x for x in xb))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.5
    cos = sum(x * y for x, y in zip(xa, xb)) / (na * nb)
    cos = max(-1.0, min(1.0, cos))
    return (cos + 1.0) / 2.0


def rank_score(sim: float, normalized_effect: float, alpha: float = DEFAULT_ALPHA) -> float:
    return alpha * sim + (1.0 - alpha) * normalized_effect


class KnowledgeBase:
    """K = {K_emp, K_sym, K_neg}.

    ``symbolic`` is the pass catalog whose deps/conflicts define validity.
    Mutations take an internal lock and bump ``version``; retrieval works on
    a snapshot, so readers never observe a half-applied write.
    """

    def __init__(
        self,
        symbolic: PassCatalog | None = None,
        epsilon: float = DEFAULT_EPSILON,
        empirical: Sequence[EmpiricalEntry] = (),
        negative: Sequence[NegativeEntry] = (),
    ):
        self.symbolic = symbolic if symbolic is not None else load_catalog()
        self.epsilon = float(epsilon)
        self._empirical: list[EmpiricalEntry] = []
        self._negative: dict[tuple[int, ...], NegativeEntry] = {}
        self._lock = threading.RLock()
        self.version = 0
        for n in negative:
            self._negative[tuple(n.sequence)] = n
        for e in empirical:
            self.insert_empirical(e)

    @property
    def empirical(self) -> tuple[EmpiricalEntry, ...]:
        with self._lock:
            return tuple(self._empirical)

    @property
    def negative(self) -> tuple[NegativeEntry, ...]:
        with self._lock:
            return tuple(self._negative.values())

    def is_negative(self, sequence: Sequence[int]) -> bool:
        with self._lock:
            return tuple(sequence) in self._negative

    def insert_empirical(self, entry: EmpiricalEntry) -> "KnowledgeBase":
        report = validate_sequence(entry.sequence, self.symbolic)
        if not report.valid:
            raise InvalidSequence(f"sequence violates constraints: {report.to_dict()['violations']}")
        with self._lock:
            if entry.sequence in self._negative:
                raise NegativeCollision(f"sequence {list(entry.sequence)} is in the negative store")
            for i, old in enumerate(self._empirical):
                if old.sequence == entry.sequence and old.features == entry.features:
                    if entry.effect > old.effect:
                        self._empirical[i] = entry
                        self.version += 1
                    return self
            self._empirical.append(entry)
            self.version += 1
        return self

    def insert_negative(self, sequence: Sequence[int], score: float) -> "KnowledgeBase":
        seq = tuple(sequence)
        if not score < self.epsilon:
            raise NotNegative(f"score {score} is not below epsilon {self.epsilon}")
        with self._lock:
            old = self._negative.get(seq)
            if old is None or score < old.score:
                self._negative[seq] = NegativeEntry(seq, float(score), self.epsilon)
            self._empirical = [e for e in self._empirical if e.sequence != seq]
            self.version += 1
        return self

    def retrieve(self, query: FeatureVector, k: int, alpha: float = DEFAULT_ALPHA) -> RetrievalResult:
        if k < 1:
            raise ValueError("k must be >= 1")
        with self._lock:
            pool = [e for e in self._empirical if e.sequence not in self._negative]
        if not pool:
            raise EmptyStore("no empirical entries available for retrieval")
        lo = min(e.effect for e in pool)
        hi = max(e.effect for e in pool)
        scored = []
        for pos, e in enumerate(pool):
            norm = 0.5 if hi == lo else (e.effect - lo) / (hi - lo)
            sim = similarity(query, e.features)
            scored.append((-rank_score(sim, norm, alpha), pos, RankedEntry(e, sim, rank_score(sim, norm, alpha))))
        scored.sort(key=lambda t: (t[0], t[1]))
        return RetrievalResult(tuple(t[2] for t in scored[:k]), k)

    def stats(self) -> dict:
        with self._lock:
            effects = [e.effect for e in self._empirical]
            return {
                "version": self.version,
                "epsilon": self.epsilon,
                "empirical": len(self._empirical),
                "negative": len(self._negative),
                "programs": len({e.provenance for e in self._empirical}),
                "mean_effect": sum(effects) / len(effects) if effects else None,
                "max_effect": max(effects) if effects else None,
            }

    # -- persistence -------------------------------------------------------

    def to_json(self) -> dict:
        cat = self.symbolic
        with self._lock:
            return {
                "version": SCHEMA_VERSION,
                "epsilon": self.epsilon,
                "empirical": [
                    {
                        "features": e.features.as_dict(),
                        "sequence": render_flags(e.sequence, cat),
                        "effect": e.effect,
                        "provenance": e.provenance,
                        "note": e.note,
                    }
                    for e in self._empirical
                ],
                "negative": [
                    {
                        "sequence": render_flags(n.sequence, cat),
                        "score": n.score,
                        "threshold_at_insert": n.threshold_at_insert,
                    }
                    for n in self._negative.values()
                ],
            }

    def persist(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    def same_content(self, other: "KnowledgeBase") -> bool:
        return (
            self.epsilon == other.epsilon
            and self.empirical == other.empirical
            and set(self.negative) == set(other.negative)
        )


def kb_from_json(doc: dict, catalog: PassCatalog | None = None) -> KnowledgeBase:
    if doc.get("version") != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"knowledge base schema version {doc.get('version')!r}, expected {SCHEMA_VERSION}"
        )
    cat = catalog if catalog is not None else load_catalog()
    negative = [
        NegativeEntry(parse_flags(n["sequence"], cat), float(n["score"]), float(n["threshold_at_insert"]))
        for n in doc.get("negative", [])
    ]
    empirical = [
        EmpiricalEntry(
            features=FeatureVector.from_mapping(e["features"]),
            sequence=parse_flags(e["sequence"], cat),
            effect=float(e["effect"]),
            provenance=e.get("provenance", ""),
            note=e.get("note", ""),
        )
        for e in doc.get("empirical", [])
    ]
    return KnowledgeBase(cat, float(doc.get("epsilon", DEFAULT_EPSILON)), empirical, negative)


def load_kb(path: str | Path, catalog: PassCatalog | None = None) -> KnowledgeBase:
    return kb_from_json(json.loads(Path(path).read_text()), catalog)


def seed_kb_path() -> Path:
    from importlib import resources

    return Path(str(resources.files("aware_opt.data").joinpath("seed_kb.json")))
