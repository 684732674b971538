"""The 125-action pass space: catalog loading plus sequence validation and repair."""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

# Index order of the action space (124 LLVM 10 opt passes, then -Oz).
PASS_NAMES: tuple[str, ...] = (
    "add-discriminators", "adce", "aggressive-instcombine", "alignment-from-assumptions",
    "always-inline", "argpromotion", "attributor", "barrier", "bdce", "break-crit-edges",
    "simplifycfg", "callsite-splitting", "called-value-propagation", "canonicalize-aliases",
    "consthoist", "constmerge", "constprop", "coro-cleanup", "coro-early", "coro-elide",
    "coro-split", "correlated-propagation", "cross-dso-cfi", "deadargelim", "dce", "die",
    "dse", "reg2mem", "div-rem-pairs", "early-cse-memssa", "early-cse", "elim-avail-extern",
    "ee-instrument", "flattencfg", "float2int", "forceattrs", "inline",
    "insert-gcov-profiling", "gvn-hoist", "gvn", "globaldce", "globalopt", "globalsplit",
    "guard-widening", "hotcoldsplit", "ipconstprop", "ipsccp", "indvars", "irce",
    "infer-address-spaces", "inferattrs", "inject-tli-mappings", "instsimplify",
    "instcombine", "instnamer", "jump-threading", "lcssa", "licm", "libcalls-shrinkwrap",
    "load-store-vectorizer", "loop-data-prefetch", "loop-deletion", "loop-distribute",
    "loop-fusion", "loop-guard-widening", "loop-idiom", "loop-instsimplify",
    "loop-interchange", "loop-load-elim", "loop-predication", "loop-reroll", "loop-rotate",
    "loop-simplifycfg", "loop-simplify", "loop-sink", "loop-reduce", "loop-unroll-and-jam",
    "loop-unroll", "loop-unswitch", "loop-vectorize", "loop-versioning-licm",
    "loop-versioning", "loweratomic", "lower-constant-intrinsics", "lower-expect",
    "lower-guard-intrinsic", "lowerinvoke", "lower-matrix-intrinsics", "lowerswitch",
    "lower-widenable-condition", "memcpyopt", "mergefunc", "mergeicmps", "mldst-motion",
    "sancov", "name-anon-globals", "nary-reassociate", "newgvn", "pgo-memop-opt",
    "partial-inliner", "partially-inline-libcalls", "post-inline-ee-instrument",
    "functionattrs", "mem2reg", "prune-eh", "reassociate", "redundant-dbg-inst-elim",
    "rpo-functionattrs", "rewrite-statepoints-for-gc", "sccp", "slp-vectorizer", "sroa",
    "scalarizer", "separate-const-offset-from-gep", "simple-loop-unswitch", "sink",
    "speculative-execution", "slsr", "strip-dead-prototypes", "strip-debug-declare",
    "strip-nondebug", "strip", "tailcallelim", "mergereturn", "-Oz",
)
OZ_INDEX = 124


class CatalogError(ValueError):
    pass


class UnknownPass(KeyError):
    def __init__(self, what):
        super().__init__(what)
        self.what = what

    def __str__(self) -> str:
        return f"unknown pass: {self.what!r}"


class RepairImpossible(ValueError):
    pass


@dataclass(frozen=True)
class PassDescriptor:
    index: int
    flag: str
    semantics: str = ""
    deps: frozenset[int] = frozenset()
    conflicts: frozenset[int] = frozenset()

    @property
    def name(self) -> str:
        return _bare(self.flag)


def _bare(flag: str) -> str:
    return flag.lstrip("-")


class PassCatalog:
    """Immutable catalog of passes; structural invariants are checked on construction."""

    def __init__(self, passes: Iterable[PassDescriptor]):
        self.passes: tuple[PassDescriptor, ...] = tuple(sorted(passes, key=lambda p: p.index))
        self._by_index: dict[int, PassDescriptor] = {}
        self._by_name: dict[str, PassDescriptor] = {}
        for p in self.passes:
            if p.index in self._by_index:
                raise CatalogError(f"duplicate pass index {p.index}")
            if p.name in self._by_name:
                raise CatalogError(f"duplicate pass flag {p.flag!r}")
            self._by_index[p.index] = p
            self._by_name[p.name] = p
        for p in self.passes:
            if p.index in p.deps or p.index in p.conflicts:
                raise CatalogError(f"pass {p.flag} depends on or conflicts with itself")
            for j in p.deps | p.conflicts:
                if j not in self._by_index:
                    raise CatalogError(f"pass {p.flag} references unknown index {j}")
            for j in p.conflicts:
                if p.index not in self._by_index[j].conflicts:
                    raise CatalogError(
                        f"asymmetric conflict: {p.flag} lists {self._by_index[j].flag}, not vice versa"
                    )
        try:
            tuple(TopologicalSorter({p.index: p.deps for p in self.passes}).static_order())
        except CycleError as exc:
            raise CatalogError(f"dependency cycle among passes {exc.args[1]}") from None

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "PassCatalog":
        try:
            return cls(
                PassDescriptor(
                    index=int(r["index"]),
                    flag=str(r["flag"]),
                    semantics=str(r.get("semantics", "")),
                    deps=frozenset(int(d) for d in r.get("deps", ())),
                    conflicts=frozenset(int(c) for c in r.get("conflicts", ())),
                )
                for r in records
            )
        except (KeyError, TypeError) as exc:
            raise CatalogError(f"malformed catalog record: {exc}") from None

    def to_records(self) -> list[dict]:
        return [
            {"index": p.index, "flag": p.flag, "semantics": p.semantics,
             "deps": sorted(p.deps), "conflicts": sorted(p.conflicts)}
            for p in self.passes
        ]

    def __len__(self) -> int:
        return len(self.passes)

    def __contains__(self, index: object) -> bool:
        return index in self._by_index

    def __getitem__(self, index: int) -> PassDescriptor:
        return self._by_index[index]

    def lookup(self, flag: str) -> PassDescriptor:
        try:
            return self._by_name[_bare(flag.strip())]
        except KeyError:
            raise UnknownPass(flag) from None

    def has_constraints(self) -> bool:
        return any(p.deps or p.conflicts for p in self.passes)


def load_catalog(path: str | Path | None = None, *, strict: bool = True) -> PassCatalog:
    """Load a catalog JSON file (a list of ``{index, flag, semantics, deps, conflicts}``).

    With ``strict`` the catalog must hold exactly the 125 actions of the
    pass table, index for index. ``path=None`` loads the shipped
    production catalog.
    """
    if path is None:
        text = resources.files("aware_opt.data").joinpath("passes.json").read_text()
    else:
        text = Path(path).read_text()
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from None
    if not isinstance(records, list):
        raise CatalogError("catalog must be a JSON list")
    catalog = PassCatalog.from_records(records)
    if strict:
        names = [p.name for p in catalog.passes]
        expected = [_bare(f) for f in PASS_NAMES]
        if [p.index for p in catalog.passes] != list(range(len(expected))) or names != expected:
            missing = sorted(set(expected) - set(names))
            raise CatalogError(f"catalog does not match the 125-action table (missing: {missing})")
    return catalog


def curated_catalog() -> PassCatalog:
    """The shipped catalog with a small table of well-known deps/conflicts."""
    path = resources.files("aware_opt.data").joinpath("passes_curated.json")
    with resources.as_file(path) as p:
        return load_catalog(p)


@dataclass(frozen=True)
class Violation:
    kind: str  # DependencyViolation | ConflictViolation | UnknownPass
    positions: tuple[int | None, ...]
    passes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "positions": list(self.positions), "passes": list(self.passes)}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [v.to_dict() for v in self.violations]}


def _first_positions(seq: Sequence[int]) -> dict[int, int]:
    first: dict[int, int] = {}
    for pos, p in enumerate(seq):
        first.setdefault(p, pos)
    return first


def validate_sequence(seq: Sequence[int], catalog: PassCatalog) -> ValidationReport:
    """Report every constraint violation in ``seq``.

    A dependency ``a`` of ``b`` must occur somewhere before the first
    occurrence of ``b``. Conflicting passes may not both be present, in
    either order. Repeated passes are allowed.
    """
    violations: list[Violation] = []
    for pos, p in enumerate(seq):
        if p not in catalog:
            violations.append(Violation("UnknownPass", (pos,), (p,)))
    first = _first_positions([p for p in seq])
    known = {p: pos for p, pos in first.items() if p in catalog}
    for j, pos_j in sorted(known.items(), key=lambda kv: kv[1]):
        for i in sorted(catalog[j].deps):
            pos_i = known.get(i)
            if pos_i is None or pos_i > pos_j:
                violations.append(Violation("DependencyViolation", (pos_i, pos_j), (i, j)))
    ordered = sorted(known.items(), key=lambda kv: kv[1])
    for a in range(len(ordered)):
        i, pos_i = ordered[a]
        for b in range(a + 1, len(ordered)):
            j, pos_j = ordered[b]
            if j in catalog[i].conflicts:
                violations.append(Violation("ConflictViolation", (pos_i, pos_j), (i, j)))
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class RepairResult:
    sequence: tuple[int, ...]
    dropped: tuple[int, ...] = ()   # input positions removed
    inserted: tuple[int, ...] = ()  # pass indices added
    reordered: bool = False
    is_subsequence: bool = True     # output is a subsequence of the input

    def to_dict(self) -> dict:
        return {
            "sequence": list(self.sequence), "dropped_positions": list(self.dropped),
            "inserted": list(self.inserted), "reordered": self.reordered,
            "is_subsequence": self.is_subsequence,
        }


def _dep_closure(p: int, catalog: PassCatalog) -> list[int]:
    """Transitive dependencies of ``p`` in a valid execution order."""
    seen: set[int] = set()
    order: list[int] = []

    def visit(q: int) -> None:
        for d in sorted(catalog[q].deps):
            if d not in seen:
                seen.add(d)
                visit(d)
                order.append(d)

    visit(p)
    return order


def repair_sequence(seq: Sequence[int], catalog: PassCatalog) -> RepairResult:
    """Turn ``seq`` into a valid sequence with as few edits as the rules allow.

    1. Drop unknown passes and the later member of each conflicting pair.
    2. Insert absent dependencies immediately before their first dependent.
    3. If a dependency still follows its dependent, reorder with a stable
       topological sort of first occurrences.
    """
    if validate_sequence(seq, catalog).valid:
        return RepairResult(tuple(seq))

    kept: list[int] = []
    dropped: list[int] = []
    present: set[int] = set()
    for pos, p in enumerate(seq):
        if p not in catalog or (p not in present and catalog[p].conflicts & present):
            dropped.append(pos)
            continue
        kept.append(p)
        present.add(p)

    out: list[int] = []
    inserted: list[int] = []
    everywhere = set(kept)
    for p in kept:
        if p not in set(out):
            missing = [d for d in _dep_closure(p, catalog) if d not in everywhere]
            for d in missing:
                clash = catalog[d].conflicts & (everywhere | {p})
                if clash:
                    raise RepairImpossible(
                        f"dependency {catalog[d].flag} of {catalog[p].flag} conflicts with "
                        + ", ".join(catalog[c].flag for c in sorted(clash))
                    )
                out.append(d)
                inserted.append(d)
                everywhere.add(d)
        out.append(p)

    reordered = False
    if not validate_sequence(out, catalog).valid:
        out = _stable_topo(out, catalog)
        reordered = True
    report = validate_sequence(out, catalog)
    if not report.valid:  # only reachable via conflicting dependency chains
        raise RepairImpossible(f"could not repair sequence: {report.to_dict()}")
    return RepairResult(
        tuple(out), tuple(dropped), tuple(inserted), reordered,
        is_subsequence=not inserted and not reordered,
    )


def _stable_topo(seq: list[int], catalog: PassCatalog) -> list[int]:
    first = _first_positions(seq)
    preds: dict[int, set[int]] = {k: set() for k in range(len(seq))}
    for p, pos in first.items():
        for d in catalog[p].deps:
            if d in first:
                preds[pos].add(first[d])
    succs: dict[int, list[int]] = {k: [] for k in range(len(seq))}
    for node, ps in preds.items():
        for q in ps:
            succs[q].append(node)
    indeg = {k: len(v) for k, v in preds.items()}
    ready = [k for k, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        k = heapq.heappop(ready)
        order.append(k)
        for s in succs[k]:
            indeg[s] -= 1
            if indeg[s] == 0:
                heapq.heappush(ready, s)
    return [seq[k] for k in order]


def render_flags(seq: Sequence[int], catalog: PassCatalog) -> list[str]:
    """Flags for ``seq`` in order: ``--<name>`` for passes, ``-Oz`` for the pipeline action."""
    flags = []
    for p in seq:
        if p not in catalog:
            raise UnknownPass(p)
        name = catalog[p].name
        flags.append("-" + name if name == "Oz" else "--" + name)
    return flags


def parse_flags(flags: Sequence[str], catalog: PassCatalog) -> tuple[int, ...]:
    """Inverse of :func:`render_flags`; accepts one or two leading dashes."""
    if isinstance(flags, str):
        flags = [f for f in flags.split(",") if f.strip()]
    return tuple(catalog.lookup(f).index for f in flags)
