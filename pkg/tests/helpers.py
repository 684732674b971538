"""Independent oracles and fakes shared by the test modules."""
from __future__ import annotations

import json
import math
import random
import stat
import sys
from dataclasses import dataclass, field
from pathlib import Path

from aware_opt.env import InstrCountResult, UnknownProgram
from aware_opt.ir import FEATURE_NAMES, FeatureVector
from aware_opt.passes import PassCatalog, PassDescriptor


def synthetic_catalog(rng: random.Random, n: int = 8, p_dep: float = 0.2, p_conf: float = 0.1) -> PassCatalog:
    """Random acyclic deps (edges follow a random permutation) and symmetric conflicts."""
    order = list(range(n))
    rng.shuffle(order)
    rank = {p: r for r, p in enumerate(order)}
    deps = {p: set() for p in range(n)}
    conf = {p: set() for p in range(n)}
    for a in range(n):
        for b in range(n):
            if a != b and rank[a] < rank[b] and rng.random() < p_dep:
                deps[b].add(a)
            if a < b and rng.random() < p_conf:
                conf[a].add(b)
                conf[b].add(a)
    return PassCatalog(
        PassDescriptor(p, f"--p{p}", "", frozenset(deps[p]), frozenset(conf[p])) for p in range(n)
    )


def brute_force_violations(seq, catalog: PassCatalog) -> set:
    """All constraint violations by exhaustive pairwise enumeration.

    Dependency: every occurrence of b needs some earlier occurrence of each a in deps(b).
    Conflict: both members of a conflicting pair occur anywhere in the sequence.
    """
    out = set()
    n = len(catalog)
    for j in range(len(seq)):
        b = seq[j]
        if not 0 <= b < n:
            out.add(("UnknownPass", (b,)))
            continue
        for a in catalog[b].deps:
            if not any(seq[i] == a for i in range(j)):
                out.add(("DependencyViolation", (a, b)))
    for i in range(len(seq)):
        for j in range(len(seq)):
            a, b = seq[i], seq[j]
            if a != b and 0 <= a < n and 0 <= b < n and b in catalog[a].conflicts:
                out.add(("ConflictViolation", tuple(sorted((a, b)))))
    return out


def report_violations(report) -> set:
    out = set()
    for v in report.violations:
        passes = tuple(sorted(v.passes)) if v.kind == "ConflictViolation" else tuple(v.passes)
        out.add((v.kind, passes))
    return out


def oracle_similarity(a, b) -> float:
    xa = [math.log(1 + v) for v in a]
    xb = [math.log(1 + v) for v in b]
    na = math.sqrt(sum(x * x for x in xa))
    nb = math.sqrt(sum(x * x for x in xb))
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        return 0.5
    return (sum(x * y for x, y in zip(xa, xb)) / (na * nb) + 1) / 2


def oracle_retrieve(entries, negatives, query, k, alpha=0.5):
    """Score every surviving entry, then sort; returns (position, score) pairs."""
    pool = [(pos, e) for pos, e in enumerate(entries) if e.sequence not in negatives]
    effects = [e.effect for _, e in pool]
    lo, hi = min(effects), max(effects)
    scored = []
    for rank, (pos, e) in enumerate(pool):
        norm = 0.5 if hi == lo else (e.effect - lo) / (hi - lo)
        scored.append((alpha * oracle_similarity(query, e.features) + (1 - alpha) * norm, rank, e))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(e, s) for s, _, e in scored[:k]]


def random_features(rng: random.Random, density: float = 0.5, hi: int = 50) -> FeatureVector:
    return FeatureVector(tuple(rng.randint(0, hi) if rng.random() < density else 0 for _ in FEATURE_NAMES))


SIMPLE_IR = """define i32 @f(i32 %a) {
entry:
  %x = alloca i32, align 4
  store i32 %a, i32* %x, align 4
  %v = load i32, i32* %x, align 4
  %r = add i32 %v, 1
  ret i32 %r
}
"""


@dataclass
class FakeEnv:
    """Offline stand-in for the compiler environment.

    Counts come from a table keyed by the flag tuple; flags not in the
    catalog fail to compile, as a real ``opt`` would.
    """

    root: Path
    ic_unopt: int = 100
    ic_oz: int = 70
    table: dict = field(default_factory=dict)
    default_after: int = 80
    known_flags: set | None = None
    programs: dict = field(default_factory=dict)
    calls: list = field(default_factory=list)

    def add_program(self, pid: str, ir: str = SIMPLE_IR) -> None:
        path = self.root / f"{pid}.ll"
        path.write_text(ir)
        self.programs[pid] = path

    def resolve(self, program_id: str) -> Path:
        if program_id not in self.programs:
            raise UnknownProgram(program_id)
        return self.programs[program_id]

    def instcount(self, program_id, flags):
        self.resolve(program_id)
        flags = tuple(flags)
        self.calls.append((program_id, flags))
        if self.known_flags is not None and any(f not in self.known_flags for f in flags):
            bad = next(f for f in flags if f not in self.known_flags)
            return InstrCountResult("compile_error", stderr_excerpt=f"unknown pass name {bad!r}")
        if flags == ("-Oz",):
            after = self.ic_oz
        else:
            after = self.table.get(flags, self.default_after)
        return InstrCountResult.from_counts(self.ic_unopt, after, self.ic_oz)


# -- transcripts -------------------------------------------------------------

REFERENCE_SEQUENCE = ["--inferattrs", "--dse", "--mldst-motion", "--mergefunc"]


def reference_assistant_turns(features_json: str = "{}", program_id: str = "prog") -> list[str]:
    """The reference exchange, chat markers included, with the elisions dropped."""
    query = json.dumps(features_json)
    seq = json.dumps(REFERENCE_SEQUENCE)
    return [
        "<|im_start|>assistant \n<think> Analyzing the autophase features, I notice a high number of memory "
        "instructions and branches. I will prioritize memory and control-flow optimizations. \n</think> \n"
        "<tool_call> \n"
        f'{{"name": "lightrag_compiler_optimization", "arguments": {{"query": {query}}}}} \n'
        "</tool_call> \n<|im_end|>",
        "<|im_start|>assistant \n<think> I will verify the recommended sequence using the instrcount tool. \n"
        "</think> \n<tool_call> \n"
        f'{{"name": "instrcount", "arguments": {{"filename": "{program_id}", "optimization_flags": {seq}}}}} '
        "</tool_call> \n<|im_end|>",
        f"<|im_start|>assistant \n<answer>\n{seq}\n</answer> \n<|im_end|>",
    ]


REFERENCE_TOOL_PAYLOADS = [
    {"recommended_pass_sequence": REFERENCE_SEQUENCE, "performance_improvement": 0.42},
    {"status": "success", "improvement_over_oz": 0.42},
]


def make_trajectory(assistant_raw: list[str], tool_payloads: list[dict] | None = None, program_id: str = "prog"):
    """Interleave parsed assistant turns with tool turns, as the runtime records them."""
    from aware_opt.agent.protocol import parse_turn, tool_turn
    from aware_opt.agent.runtime import Trajectory
    from aware_opt.reward import total_reward

    payloads = list(tool_payloads or [])
    turns = []
    for i, raw in enumerate(assistant_raw):
        turns.append(parse_turn(raw))
        if i < len(payloads):
            turns.append(tool_turn(payloads[i]))
    answer = next((t.answer.body for t in reversed(turns) if t.role == "assistant" and t.answer
                   and isinstance(t.answer.body, list)), None)
    return Trajectory(program_id, "prompt", turns, answer, total_reward(0, 0, 0.0), [], "answer")


# -- scripted opt binary -----------------------------------------------------

FAKE_OPT = """\
#!{python}
# Minimal stand-in for a stock opt: copies input to -o, understands a few
# test-only flags, and appends every invocation to a log file.
import sys, time, pathlib
args = sys.argv[1:]
with open({log!r}, "a") as fh:
    fh.write(" ".join(args) + "\\n")
if "--version" in args:
    print("fake opt 10.0"); sys.exit(0)
if "--sleep" in args:
    time.sleep(5)
if "--explode" in args:
    sys.stderr.write("opt: Unknown command line argument '--explode'\\n"); sys.exit(1)
src = next(a for a in args if a.endswith(".ll"))
out = args[args.index("-o") + 1]
text = pathlib.Path(src).read_text()
if "--drop-add" in args:
    text = "\\n".join(l for l in text.splitlines() if " = add " not in l) + "\\n"
if "-Oz" in args:
    text = "\\n".join(l for l in text.splitlines() if " = add " not in l and " alloca " not in l) + "\\n"
pathlib.Path(out).write_text(text)
"""


def make_fake_opt(root: Path) -> tuple[Path, Path]:
    """Write the scripted opt into ``root``; returns (executable, invocation log)."""
    log = root / "calls.log"
    exe = root / "opt"
    exe.write_text(FAKE_OPT.format(python=sys.executable, log=str(log)))
    exe.chmod(exe.stat().st_mode | stat.S_IXUSR)
    return exe, log
