"""aware-opt command line."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import __version__
from .ir import extract_features, parse_ir
from .ir.parser import ParseError

log = logging.getLogger("aware_opt")


@dataclass
class Config:
    w_format: float = 0.1
    w_answer: float = 0.2
    w_performance: float = 0.7
    alpha: float = 0.5
    epsilon: float = 0.0
    gamma: float = 1.0
    k: int = 1
    workers: int = 4
    max_turns: int = 8
    timeout: float = 60.0
    workdir: str | None = None
    extra: dict = field(default_factory=dict)


def load_config(path: str | None) -> Config:
    if not path:
        return Config()
    p = Path(path)
    if p.suffix == ".toml":
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            try:
                import tomli as tomllib
            except ImportError:
                raise SystemExit("TOML config needs Python >= 3.11 or the tomli package; use JSON instead")
        doc = tomllib.loads(p.read_text())
    else:
        doc = json.loads(p.read_text())
    weights = doc.pop("weights", {})
    for k in ("format", "answer", "performance"):
        if k in weights:
            doc["w_" + k] = weights[k]
    known = {f.name for f in fields(Config)}
    cfg = Config(**{k: v for k, v in doc.items() if k in known})
    cfg.extra = {k: v for k, v in doc.items() if k not in known}
    return cfg


def _catalog(args):
    from .passes import curated_catalog, load_catalog

    if getattr(args, "catalog", None) == "curated":
        return curated_catalog()
    return load_catalog(getattr(args, "catalog", None))


def _kb(args, cfg: Config, catalog, required: bool = True):
    from .knowledge import KnowledgeBase, load_kb, seed_kb_path

    path = getattr(args, "kb", None)
    if path is None:
        seed = seed_kb_path()
        if seed.is_file():
            path = str(seed)
    if path is None or not Path(path).is_file():
        if required and getattr(args, "kb", None):
            raise SystemExit(f"knowledge base not found: {path}")
        return KnowledgeBase(catalog, cfg.epsilon)
    kb = load_kb(path, catalog)
    kb.epsilon = cfg.epsilon if getattr(args, "config", None) else kb.epsilon
    return kb


def _env(args, cfg: Config, programs=None, catalog=None):
    from .env import CompilerConfig, CompilerEnv

    opt = getattr(args, "opt", None)
    cc = CompilerConfig(opt, cfg.workdir or "/tmp/aware-opt-work", cfg.timeout) if opt else \
        CompilerConfig.default(cfg.workdir, cfg.timeout)
    return CompilerEnv(cc, programs, catalog)


def _manifest(args):
    from .harness import load_manifest, mini_corpus_manifest

    return load_manifest(args.manifest) if args.manifest else mini_corpus_manifest()


def _policy_factory(args, cfg: Config):
    from .agent import PolicyEndpoint, RemoteChatPolicy, reference_policy

    if args.policy == "mock":
        return lambda pid: reference_policy(max_turns=cfg.max_turns)
    endpoint = PolicyEndpoint.from_env(endpoint_url=args.url, model_name=args.model, max_turns=cfg.max_turns)
    return lambda pid: RemoteChatPolicy(endpoint)


def _episode_cfg(args, cfg: Config):
    from .agent import EpisodeConfig
    from .reward import RewardWeights

    return EpisodeConfig(k=cfg.k, alpha=cfg.alpha, repair=getattr(args, "repair", False),
                         write_back=not getattr(args, "no_write_back", False),
                         weights=RewardWeights(cfg.w_format, cfg.w_answer, cfg.w_performance))


# -- commands ---------------------------------------------------------------


def cmd_features(args, cfg: Config) -> int:
    try:
        fv = extract_features(parse_ir(Path(args.ir).read_text(), source_name=args.ir))
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.table:
        for name, v in fv.as_dict().items():
            print(f"{name:<16} {v}")
    else:
        print(json.dumps(fv.as_dict(), indent=1))
    return 0


def cmd_validate(args, cfg: Config) -> int:
    from .passes import RepairImpossible, UnknownPass, parse_flags, render_flags, repair_sequence, validate_sequence

    catalog = _catalog(args)
    try:
        seq = parse_flags(args.flags, catalog)
    except UnknownPass as exc:
        print(f"invalid: {exc}")
        return 1
    report = validate_sequence(seq, catalog)
    out = {"valid": report.valid, **report.to_dict()}
    if not report.valid and args.repair:
        try:
            fixed = repair_sequence(seq, catalog)
            out["repaired"] = render_flags(fixed.sequence, catalog)
        except RepairImpossible as exc:
            out["repair_error"] = str(exc)
    print(json.dumps(out, indent=1))
    return 0 if report.valid else 1


def cmd_kb(args, cfg: Config) -> int:
    from .knowledge import EmpiricalEntry, KnowledgeBaseError
    from .passes import parse_flags, render_flags

    catalog = _catalog(args)
    if args.kb_cmd == "seed":
        from .search import seed_knowledge_base
        from .knowledge import KnowledgeBase

        manifest = _manifest(args)
        env = _env(args, cfg, manifest.registry(), catalog)
        feats = {p.id: extract_features(parse_ir(p.ir_path.read_text())) for p in manifest.programs}
        kb = seed_knowledge_base(env, feats, KnowledgeBase(catalog, cfg.epsilon), budget=args.budget,
                                 seed=args.seed, keep=args.keep, workers=cfg.workers)
        kb.persist(args.out)
        print(json.dumps(kb.stats(), indent=1))
        return 0
    kb = _kb(args, cfg, catalog, required=args.kb_cmd != "insert")
    if args.kb_cmd == "stats":
        print(json.dumps(kb.stats(), indent=1))
        return 0
    fv = extract_features(parse_ir(Path(args.ir).read_text(), source_name=args.ir))
    if args.kb_cmd == "query":
        try:
            res = kb.retrieve(fv, args.k, cfg.alpha)
        except KnowledgeBaseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(json.dumps([
            {"sequence": render_flags(r.entry.sequence, catalog), "effect": r.entry.effect,
             "similarity": round(r.similarity, 6), "rank_score": round(r.rank_score, 6),
             "provenance": r.entry.provenance}
            for r in res.ranked
        ], indent=1))
        return 0
    # insert
    try:
        seq = parse_flags(args.flags, catalog)
        if args.negative:
            kb.insert_negative(seq, args.effect)
        else:
            kb.insert_empirical(EmpiricalEntry(fv, seq, args.effect, args.provenance or Path(args.ir).stem, "cli"))
    except (KnowledgeBaseError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    kb.persist(args.kb)
    print(json.dumps(kb.stats(), indent=1))
    return 0


def cmd_eval(args, cfg: Config) -> int:
    from .agent import write_trajectories
    from .harness import evaluate_method, overall_average, save_reports

    catalog = _catalog(args)
    manifest = _manifest(args)
    env = _env(args, cfg, manifest.registry(), catalog)
    kb = make_policy = None
    trajectories = []
    if args.method == "agent":
        kb = _kb(args, cfg, catalog)
        make_policy = _policy_factory(args, cfg)
    reports = evaluate_method(manifest, args.method, env, kb, make_policy=make_policy,
                              episode_cfg=_episode_cfg(args, cfg), catalog=catalog,
                              workers=cfg.workers, trajectories=trajectories)
    for r in reports:
        avg = "n/a" if r.average_reduction is None else f"{r.average_reduction * 100:.2f}%"
        sr = "n/a" if r.success_rate is None else f"{r.success_rate:.2f}"
        line = f"{r.suite:<12} {args.method:<10} avg reduction {avg}  success rate {sr}"
        if args.geomean and r.geomean_ratio is not None:
            line += f"  geomean {r.geomean_ratio * 100:.2f}%"
        print(line)
        for p in r.per_program:
            if p.error:
                print(f"  {p.id}: failed: {p.error.splitlines()[0] if p.error else ''}")
    overall = overall_average(reports)
    if overall is not None:
        print(f"{'Avg.':<12} {args.method:<10} {overall * 100:.2f}%")
    if args.out:
        save_reports(reports, args.out)
    if args.trajectories and trajectories:
        write_trajectories(args.trajectories, trajectories)
    if args.kb_out and kb is not None:
        kb.persist(args.kb_out)
    return 0


def cmd_agent(args, cfg: Config) -> int:
    from .agent import PolicyUnreachable, run_episode, write_trajectories
    from .env import UnknownProgram
    from .reward import DiscountedReturn, turn_rewards

    catalog = _catalog(args)
    manifest = _manifest(args)
    env = _env(args, cfg, manifest.registry(), catalog)
    kb = _kb(args, cfg, catalog)
    policy = _policy_factory(args, cfg)(args.program)
    try:
        traj = run_episode(args.program, policy, kb, env, _episode_cfg(args, cfg), catalog)
    except UnknownProgram as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PolicyUnreachable as exc:
        print(f"error: policy unreachable: {exc}", file=sys.stderr)
        return 3
    ret = DiscountedReturn.of(turn_rewards(traj), cfg.gamma)
    summary = {
        "program_id": traj.program_id,
        "terminated_by": traj.terminated_by,
        "final_sequence": traj.final_sequence,
        "rewards": traj.rewards.to_dict(),
        "return": ret.return_value,
        "improvement_over_oz": traj.final_result.improvement_over_oz if traj.final_result else None,
        "answer_from_retrieval": traj.answer_from_retrieval,
    }
    print(json.dumps(summary, indent=1))
    if args.log:
        write_trajectories(args.log, [traj])
    if args.kb_out:
        kb.persist(args.kb_out)
    return 0


def cmd_report(args, cfg: Config) -> int:
    from .harness import MismatchedPrograms, compare_report, load_reports

    try:
        cmp = compare_report(load_reports(args.a), load_reports(args.b))
    except MismatchedPrograms as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(cmp.to_table(Path(args.a).stem, Path(args.b).stem))
    if args.csv:
        Path(args.csv).write_text(cmp.to_csv())
    return 0


def cmd_dataset(args, cfg: Config) -> int:
    from contextlib import ExitStack

    from .agent import read_trajectories
    from .dataset import build_dataset

    with ExitStack() as stack:
        rec = stack.enter_context(open(args.records, "w")) if args.records else None
        sft = stack.enter_context(open(args.sft, "w")) if args.sft else None
        summary = build_dataset(read_trajectories(args.src), rec, sft, args.min_effect)
    print(json.dumps({"records": summary.records, "sft": summary.sft, "rejected": summary.rejected}, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aware-opt", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--config", help="JSON (or TOML on Python >= 3.11) config file")
    ap.add_argument("--catalog", help="pass catalog JSON, or 'curated' for the constrained catalog")
    ap.add_argument("--opt", help="opt binary (default: $AWARE_OPT_BIN, opt on PATH, or aware-opt-llvm)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("features", help="print the 56 static features of an IR file")
    p.add_argument("ir")
    p.add_argument("--table", action="store_true", help="aligned name/value table instead of JSON")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("validate", help="check a pass sequence against the catalog constraints")
    p.add_argument("--flags", required=True, help="comma-separated flags, e.g. --mem2reg,--gvn")
    p.add_argument("--repair", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("kb", help="knowledge base operations")
    kbs = p.add_subparsers(dest="kb_cmd", required=True)
    q = kbs.add_parser("stats")
    q.add_argument("--kb")
    q = kbs.add_parser("query")
    q.add_argument("ir")
    q.add_argument("--kb")
    q.add_argument("-k", type=int, default=3)
    q = kbs.add_parser("insert")
    q.add_argument("ir")
    q.add_argument("--kb", required=True)
    q.add_argument("--flags", required=True)
    q.add_argument("--effect", type=float, required=True)
    q.add_argument("--negative", action="store_true")
    q.add_argument("--provenance")
    q = kbs.add_parser("seed", help="search for sequences beating -Oz and write a knowledge base")
    q.add_argument("--manifest")
    q.add_argument("--out", required=True)
    q.add_argument("--budget", type=int, default=40)
    q.add_argument("--keep", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_kb)

    p = sub.add_parser("eval", help="evaluate a method over a benchmark manifest")
    p.add_argument("--manifest", help="manifest JSON (default: the bundled mini-corpus)")
    p.add_argument("--method", required=True, help="oz|o1|o2|o3|agent|flags:<csv>")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--geomean", action="store_true", help="also print the geometric-mean reduction")
    p.add_argument("--kb")
    p.add_argument("--kb-out")
    p.add_argument("--policy", choices=["mock", "remote"], default="mock")
    p.add_argument("--url")
    p.add_argument("--model")
    p.add_argument("--repair", action="store_true")
    p.add_argument("--no-write-back", action="store_true")
    p.add_argument("--trajectories", help="append episode logs (JSONL)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("agent", help="agent episodes")
    ags = p.add_subparsers(dest="agent_cmd", required=True)
    q = ags.add_parser("run")
    q.add_argument("--program", required=True)
    q.add_argument("--manifest")
    q.add_argument("--kb")
    q.add_argument("--kb-out")
    q.add_argument("--policy", choices=["mock", "remote"], default="mock")
    q.add_argument("--url")
    q.add_argument("--model")
    q.add_argument("--repair", action="store_true")
    q.add_argument("--no-write-back", action="store_true")
    q.add_argument("--log", help="append the trajectory (JSONL)")
    p.set_defaults(func=cmd_agent)

    p = sub.add_parser("report", help="compare saved reports")
    rs = p.add_subparsers(dest="report_cmd", required=True)
    q = rs.add_parser("compare")
    q.add_argument("a")
    q.add_argument("b")
    q.add_argument("--csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dataset", help="build dataset records and SFT samples")
    ds = p.add_subparsers(dest="dataset_cmd", required=True)
    q = ds.add_parser("build")
    q.add_argument("--from", dest="src", required=True)
    q.add_argument("--records")
    q.add_argument("--sft")
    q.add_argument("--min-effect", type=float, default=-1.0)
    p.set_defaults(func=cmd_dataset)
    return ap


def _glue_flag_values(argv: list[str]) -> list[str]:
    # "--flags --gvn,--dse" would otherwise read the value as an option.
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--flags" and i + 1 < len(argv):
            out.append("--flags=" + argv[i + 1])
            i += 2
            continue
        out.append(argv[i])
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_glue_flag_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = load_config(args.config)
    return args.func(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
