"""Random-restart search for pass sequences that match or beat -Oz.

Used to seed the empirical store. Each candidate is measured with the
compiler environment; only sequences with improvement over -Oz >= 0 are kept.
"""
from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .env import CompilerEnv
from .ir import FeatureVector
from .knowledge import EmpiricalEntry, KnowledgeBase, KnowledgeBaseError
from .passes import PassCatalog

logger = logging.getLogger(__name__)

# Transform passes that are cheap and size-relevant; instrumentation and
# sanitizer passes are left out since they only grow code.
SEARCH_POOL = (
    "--adce", "--aggressive-instcombine", "--always-inline", "--argpromotion", "--bdce",
    "--called-value-propagation", "--constmerge", "--correlated-propagation", "--dce",
    "--deadargelim", "--div-rem-pairs", "--dse", "--early-cse", "--early-cse-memssa",
    "--elim-avail-extern", "--float2int", "--functionattrs", "--globaldce", "--globalopt",
    "--gvn", "--gvn-hoist", "--indvars", "--inferattrs", "--inline", "--instcombine",
    "--instsimplify", "--ipsccp", "--jump-threading", "--lcssa", "--licm", "--loop-deletion",
    "--loop-idiom", "--loop-instsimplify", "--loop-reduce", "--loop-rotate", "--loop-simplify",
    "--loop-simplifycfg", "--loop-sink", "--lower-expect", "--mem2reg", "--memcpyopt",
    "--mergefunc", "--mergereturn", "--mldst-motion", "--nary-reassociate", "--newgvn",
    "--partially-inline-libcalls", "--reassociate", "--sccp", "--simplifycfg", "--sink",
    "--sroa", "--strip-dead-prototypes", "--tailcallelim",
)


@dataclass(frozen=True)
class Candidate:
    flags: tuple[str, ...]
    ic_after: int
    improvement_over_oz: float


def _propose(rng: random.Random, pool: Sequence[str], max_len: int) -> list[str]:
    if rng.random() < 0.5:
        # -Oz followed by a short clean-up tail
        return ["-Oz"] + rng.sample(list(pool), rng.randint(1, 3))
    seq = ["--mem2reg"] if rng.random() < 0.7 else []
    seq += [rng.choice(pool) for _ in range(rng.randint(3, max_len - len(seq)))]
    return seq


def search_program(
    env: CompilerEnv,
    program_id: str,
    budget: int = 40,
    seed: int = 0,
    pool: Sequence[str] = SEARCH_POOL,
    max_len: int = 12,
    keep: int = 3,
) -> list[Candidate]:
    """Return up to ``keep`` distinct candidates with improvement over -Oz >= 0, best first."""
    rng = random.Random(f"{seed}:{program_id}")
    found: dict[tuple[str, ...], Candidate] = {}
    for _ in range(budget):
        flags = tuple(_propose(rng, pool, max_len))
        if flags in found:
            continue
        res = env.instcount(program_id, flags)
        if res.status != "success" or res.improvement_over_oz < 0:
            continue
        found[flags] = Candidate(flags, res.ic_after, res.improvement_over_oz)
    ranked = sorted(found.values(), key=lambda c: (-c.improvement_over_oz, len(c.flags), c.flags))
    return ranked[:keep]


def seed_knowledge_base(
    env: CompilerEnv,
    features: dict[str, FeatureVector],
    kb: KnowledgeBase,
    budget: int = 40,
    seed: int = 0,
    keep: int = 3,
    workers: int = 4,
) -> KnowledgeBase:
    catalog: PassCatalog = kb.symbolic

    def one(pid: str) -> tuple[str, list[Candidate]]:
        return pid, search_program(env, pid, budget=budget, seed=seed, keep=keep)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, sorted(features)))
    for pid, cands in results:
        for c in cands:
            seq = tuple(catalog.lookup(f).index for f in c.flags)
            try:
                kb.insert_empirical(EmpiricalEntry(features[pid], seq, min(c.improvement_over_oz, 1.0), pid, "search"))
            except KnowledgeBaseError as exc:
                logger.info("skipping candidate for %s: %s", pid, exc)
    return kb
