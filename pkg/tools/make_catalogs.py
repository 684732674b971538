"""Regenerate the shipped pass catalogs (production + curated constraint tables)."""
from __future__ import annotations

import json
from pathlib import Path

from aware_opt.passes import PASS_NAMES

SEMANTICS = {
    "add-discriminators": "Add DWARF path discriminators to distinguish code on the same source line",
    "adce": "Aggressive dead code elimination assuming instructions are dead until proven live",
    "aggressive-instcombine": "Expensive instruction-combining patterns such as truncation folding",
    "alignment-from-assumptions": "Use llvm.assume alignment facts to raise load/store alignment",
    "always-inline": "Inline functions marked alwaysinline",
    "argpromotion": "Promote by-reference arguments to by-value scalars",
    "attributor": "Interprocedural fixpoint deduction of function and argument attributes",
    "barrier": "No-op barrier separating pass-manager groups",
    "bdce": "Bit-tracking dead code elimination",
    "break-crit-edges": "Split critical CFG edges by inserting new blocks",
    "simplifycfg": "Merge, fold and delete basic blocks; simplify branches",
    "callsite-splitting": "Split call sites whose arguments are known on incoming paths",
    "called-value-propagation": "Annotate indirect calls with their possible callees",
    "canonicalize-aliases": "Rewrite global aliases into canonical form",
    "consthoist": "Hoist expensive integer constants to a common dominator",
    "constmerge": "Merge duplicate global constants",
    "constprop": "Fold instructions whose operands are all constants",
    "coro-cleanup": "Lower remaining coroutine intrinsics",
    "coro-early": "Lower early coroutine intrinsics",
    "coro-elide": "Elide coroutine frame heap allocations",
    "coro-split": "Split coroutines into ramp/resume/destroy functions",
    "correlated-propagation": "Propagate value ranges implied by dominating conditions",
    "cross-dso-cfi": "Build the cross-DSO control-flow-integrity check function",
    "deadargelim": "Delete dead function arguments and return values",
    "dce": "Delete trivially dead instructions, iterating to a fixpoint",
    "die": "Delete trivially dead instructions in a single sweep",
    "dse": "Delete stores that are overwritten before being read",
    "reg2mem": "Demote SSA registers to stack slots",
    "div-rem-pairs": "Pair div/rem on the same operands to reuse one result",
    "early-cse-memssa": "Early common subexpression elimination using MemorySSA",
    "early-cse": "Early dominator-scoped common subexpression elimination",
    "elim-avail-extern": "Drop bodies of available_externally functions",
    "ee-instrument": "Insert function entry/exit instrumentation calls",
    "flattencfg": "Flatten nested conditional branches into selects/ors",
    "float2int": "Demote floating-point arithmetic to integers when exact",
    "forceattrs": "Apply attributes forced on the command line",
    "inline": "Bottom-up cost-driven function inlining",
    "insert-gcov-profiling": "Insert gcov-compatible edge counters",
    "gvn-hoist": "Hoist equivalent expressions to a common dominator",
    "gvn": "Global value numbering with redundant load elimination",
    "globaldce": "Delete unreachable internal globals and functions",
    "globalopt": "Optimize global variables (constant folding, localization, shrinking)",
    "globalsplit": "Split globals with !type metadata into separate globals",
    "guard-widening": "Widen guard conditions to merge checks",
    "hotcoldsplit": "Outline cold regions into separate functions",
    "ipconstprop": "Interprocedural propagation of constant arguments and returns",
    "ipsccp": "Interprocedural sparse conditional constant propagation",
    "indvars": "Canonicalize induction variables",
    "irce": "Inductive range check elimination by loop splitting",
    "infer-address-spaces": "Infer specific address spaces for flat pointers",
    "inferattrs": "Infer attributes of known library functions",
    "inject-tli-mappings": "Inject vector-library function mappings",
    "instsimplify": "Simplify instructions without creating new ones",
    "instcombine": "Combine redundant instructions via peephole rewrites",
    "instnamer": "Give names to unnamed values",
    "jump-threading": "Thread branches over blocks whose outcome is known per predecessor",
    "lcssa": "Rewrite loops into loop-closed SSA form",
    "licm": "Hoist/sink loop-invariant code out of loops",
    "libcalls-shrinkwrap": "Guard library calls whose results are unused so they can be skipped",
    "load-store-vectorizer": "Vectorize adjacent loads and stores",
    "loop-data-prefetch": "Insert software prefetches in loops",
    "loop-deletion": "Delete loops without side effects",
    "loop-distribute": "Split loops to enable vectorization",
    "loop-fusion": "Fuse adjacent compatible loops",
    "loop-guard-widening": "Widen guards within loops",
    "loop-idiom": "Recognize loop idioms such as memset/memcpy",
    "loop-instsimplify": "Instruction simplification restricted to loops",
    "loop-interchange": "Interchange nested loops for locality",
    "loop-load-elim": "Eliminate loads carried across loop iterations",
    "loop-predication": "Hoist loop-variant guards into loop-invariant predicates",
    "loop-reroll": "Reroll manually unrolled loops",
    "loop-rotate": "Rotate loops into do-while form",
    "loop-simplifycfg": "Simplify loop control flow",
    "loop-simplify": "Canonicalize loops (preheader, single backedge, dedicated exits)",
    "loop-sink": "Sink loop-invariant instructions into cold loop blocks",
    "loop-reduce": "Loop strength reduction",
    "loop-unroll-and-jam": "Unroll outer loops and fuse the inner copies",
    "loop-unroll": "Unroll loops",
    "loop-unswitch": "Hoist loop-invariant conditionals out of loops",
    "loop-vectorize": "Vectorize innermost loops",
    "loop-versioning-licm": "Version loops to enable LICM under runtime alias checks",
    "loop-versioning": "Create runtime-checked loop versions",
    "loweratomic": "Lower atomic intrinsics to non-atomic form",
    "lower-constant-intrinsics": "Lower objectsize and is.constant intrinsics",
    "lower-expect": "Lower llvm.expect into branch weights",
    "lower-guard-intrinsic": "Lower llvm.experimental.guard to branches",
    "lowerinvoke": "Lower invokes to calls",
    "lower-matrix-intrinsics": "Lower matrix intrinsics to vector operations",
    "lowerswitch": "Lower switch instructions to branch trees",
    "lower-widenable-condition": "Lower widenable conditions to true",
    "memcpyopt": "Optimize memcpy/memset idioms",
    "mergefunc": "Merge structurally identical functions",
    "mergeicmps": "Merge chains of integer comparisons into memcmp",
    "mldst-motion": "Merge and sink/hoist matching loads and stores across diamonds",
    "sancov": "Insert sanitizer coverage instrumentation",
    "name-anon-globals": "Give anonymous globals a module-unique name",
    "nary-reassociate": "Reassociate n-ary add/mul expressions for reuse",
    "newgvn": "Global value numbering on the NewGVN algorithm",
    "pgo-memop-opt": "Specialize mem intrinsics by profiled size",
    "partial-inliner": "Inline the early-return part of functions",
    "partially-inline-libcalls": "Inline fast paths of library calls such as sqrt",
    "post-inline-ee-instrument": "Entry/exit instrumentation after inlining",
    "functionattrs": "Deduce function attributes bottom-up over the call graph",
    "mem2reg": "Promote stack slots to SSA registers",
    "prune-eh": "Remove unused exception-handling information",
    "reassociate": "Reassociate commutative expressions for constant folding",
    "redundant-dbg-inst-elim": "Remove redundant debug value intrinsics",
    "rpo-functionattrs": "Deduce function attributes top-down in reverse post-order",
    "rewrite-statepoints-for-gc": "Make GC relocations explicit at statepoints",
    "sccp": "Sparse conditional constant propagation",
    "slp-vectorizer": "Vectorize straight-line code (superword parallelism)",
    "sroa": "Scalar replacement of aggregates",
    "scalarizer": "Scalarize vector operations",
    "separate-const-offset-from-gep": "Split constant offsets out of GEP indices",
    "simple-loop-unswitch": "Unswitch loop-invariant conditions",
    "sink": "Sink instructions toward their uses",
    "speculative-execution": "Speculatively hoist cheap instructions out of conditionals",
    "slsr": "Straight-line strength reduction",
    "strip-dead-prototypes": "Delete unused function declarations",
    "strip-debug-declare": "Strip llvm.dbg.declare intrinsics",
    "strip-nondebug": "Strip all symbols except debug information",
    "strip": "Strip symbols and debug information",
    "tailcallelim": "Turn self tail calls into loops",
    "mergereturn": "Unify function exit blocks into a single return",
    "-Oz": "Full size-minimizing standard optimization pipeline",
}

# Well-known prerequisites: loop transforms expect canonical loops
# (loop-simplify) in loop-closed SSA (lcssa).
LOOP_CANONICAL = ["loop-simplify", "lcssa"]
CURATED_DEPS = {
    "lcssa": ["loop-simplify"],
    "licm": LOOP_CANONICAL,
    "loop-rotate": LOOP_CANONICAL,
    "loop-unroll": LOOP_CANONICAL,
    "loop-unroll-and-jam": LOOP_CANONICAL,
    "indvars": LOOP_CANONICAL,
    "loop-deletion": LOOP_CANONICAL,
    "loop-idiom": LOOP_CANONICAL,
    "loop-instsimplify": LOOP_CANONICAL,
    "loop-interchange": LOOP_CANONICAL,
    "loop-sink": LOOP_CANONICAL,
    "loop-unswitch": LOOP_CANONICAL,
    "simple-loop-unswitch": LOOP_CANONICAL,
    "loop-vectorize": LOOP_CANONICAL,
    "loop-reduce": ["loop-simplify"],
    "loop-predication": LOOP_CANONICAL,
    "loop-load-elim": LOOP_CANONICAL,
    "loop-distribute": LOOP_CANONICAL,
    "loop-versioning-licm": LOOP_CANONICAL,
    "irce": LOOP_CANONICAL,
}
# Inverse transformations.
CURATED_CONFLICTS = [("mem2reg", "reg2mem")]


def build(curated: bool) -> list[dict]:
    idx = {name: i for i, name in enumerate(PASS_NAMES)}
    deps = {i: set() for i in idx.values()}
    conf = {i: set() for i in idx.values()}
    if curated:
        for name, reqs in CURATED_DEPS.items():
            deps[idx[name]] = {idx[r] for r in reqs}
        for a, b in CURATED_CONFLICTS:
            conf[idx[a]].add(idx[b])
            conf[idx[b]].add(idx[a])
        oz = idx["-Oz"]
        for i in idx.values():
            if i != oz:
                conf[oz].add(i)
                conf[i].add(oz)
    rows = []
    for name, i in idx.items():
        rows.append({
            "index": i,
            "flag": name if name == "-Oz" else "--" + name,
            "semantics": SEMANTICS[name],
            "deps": sorted(deps[i]),
            "conflicts": sorted(conf[i]),
        })
    return rows


if __name__ == "__main__":
    out = Path(__file__).resolve().parents[1] / "src" / "aware_opt" / "data"
    (out / "passes.json").write_text(json.dumps(build(False), indent=1) + "\n")
    (out / "passes_curated.json").write_text(json.dumps(build(True), indent=1) + "\n")
