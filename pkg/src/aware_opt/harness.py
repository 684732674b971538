"""Suite evaluation over a program registry, with report comparison."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .agent.policy import Policy
from .agent.runtime import EpisodeConfig, Trajectory, run_episode
from .env import CompileError, CompilerEnv, CompilerTimeout
from .knowledge import KnowledgeBase
from .passes import PassCatalog, UnknownPass, load_catalog, parse_flags, validate_sequence

logger = logging.getLogger(__name__)

BASELINE_METHODS = {"oz": "-Oz", "o1": "-O1", "o2": "-O2", "o3": "-O3"}


class HarnessError(Exception):
    pass


class ManifestError(HarnessError):
    pass


class MismatchedPrograms(HarnessError):
    pass


@dataclass(frozen=True)
class Program:
    id: str
    ir_path: Path
    suite: str


@dataclass
class BenchmarkManifest:
    suites: dict[str, list[Program]]

    @property
    def programs(self) -> list[Program]:
        return [p for progs in self.suites.values() for p in progs]

    def registry(self) -> dict[str, Path]:
        return {p.id: p.ir_path for p in self.programs}

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None, check_paths: bool = True) -> "BenchmarkManifest":
        base = base or Path.cwd()
        suites: dict[str, list[Program]] = {}
        seen: set[str] = set()
        try:
            for s in doc["suites"]:
                progs = []
                for p in s["programs"]:
                    if p["id"] in seen:
                        raise ManifestError(f"duplicate program id {p['id']!r}")
                    seen.add(p["id"])
                    path = Path(p["ir_path"])
                    path = path if path.is_absolute() else base / path
                    if check_paths and not path.is_file():
                        raise ManifestError(f"program {p['id']!r}: no such file {path}")
                    progs.append(Program(p["id"], path, s["name"]))
                if s["name"] in suites:
                    raise ManifestError(f"duplicate suite {s['name']!r}")
                suites[s["name"]] = progs
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"malformed manifest: {exc!r}") from None
        return cls(suites)


def load_manifest(path: str | Path) -> BenchmarkManifest:
    path = Path(path)
    return BenchmarkManifest.from_dict(json.loads(path.read_text()), base=path.parent)


def mini_corpus_manifest() -> BenchmarkManifest:
    root = Path(str(resources.files("aware_opt.data").joinpath("corpus")))
    return load_manifest(root / "manifest.json")


@dataclass
class ProgramResult:
    id: str
    ic_unopt: int | None
    ic_method: int | None
    reduction: float | None
    success: bool
    sequence: list[str] | None = None
    error: str | None = None


@dataclass
class SuiteReport:
    suite: str
    method: str
    per_program: list[ProgramResult]
    average_reduction: float | None = None
    geomean_ratio: float | None = None
    success_rate: float | None = None

    def __post_init__(self) -> None:
        self.refresh()

    def refresh(self) -> None:
        reds = [r.reduction for r in self.per_program if r.reduction is not None]
        self.average_reduction = sum(reds) / len(reds) if reds else None
        # Geometric mean of size ratios ic_method/ic_unopt, reported as 1 - geomean.
        ratios = [1.0 - r for r in reds]
        if ratios and all(x > 0 for x in ratios):
            self.geomean_ratio = 1.0 - math.exp(sum(math.log(x) for x in ratios) / len(ratios))
        else:
            self.geomean_ratio = None
        self.success_rate = success_rate(self)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        return cls(d["suite"], d["method"], [ProgramResult(**r) for r in d["per_program"]])


def success_rate(report: SuiteReport) -> float | None:
    """Fraction of programs with a valid, compiling sequence; None for an empty suite."""
    if not report.per_program:
        return None
    return sum(r.success for r in report.per_program) / len(report.per_program)


def save_reports(reports: Sequence[SuiteReport], path: str | Path) -> None:
    Path(path).write_text(json.dumps({"reports": [r.to_dict() for r in reports]}, indent=1) + "\n")


def load_reports(path: str | Path) -> list[SuiteReport]:
    return [SuiteReport.from_dict(r) for r in json.loads(Path(path).read_text())["reports"]]


def method_sequence(method: str) -> list[str] | None:
    """Flags for a baseline or ``flags:<csv>`` method; None for ``agent``."""
    m = method.strip()
    if m.lower() in BASELINE_METHODS:
        return [BASELINE_METHODS[m.lower()]]
    if m.startswith("flags:"):
        body = m[len("flags:"):]
        return [f.strip() for f in body.split(",") if f.strip()]
    if m == "agent":
        return None
    raise ValueError(f"unknown method {method!r}")


def _eval_fixed(env: CompilerEnv, prog: Program, flags: list[str], catalog: PassCatalog) -> ProgramResult:
    try:
        valid = validate_sequence(parse_flags(flags, catalog), catalog).valid
    except UnknownPass:
        valid = False
    try:
        before = env.count_after(prog.ir_path, [])
        after = env.count_after(prog.ir_path, flags)
    except (CompileError, CompilerTimeout) as exc:
        detail = getattr(exc, "stderr", "") or str(exc)
        return ProgramResult(prog.id, None, None, None, False, flags, detail)
    red = (before - after) / before if before > 0 else 0.0
    return ProgramResult(prog.id, before, after, red, valid, flags)


def _eval_agent(
    env: CompilerEnv, prog: Program, make_policy: Callable[[str], Policy], kb: KnowledgeBase | None,
    episode_cfg: EpisodeConfig, catalog: PassCatalog, sink: list[Trajectory],
) -> ProgramResult:
    try:
        traj = run_episode(prog.id, make_policy(prog.id), kb, env, episode_cfg, catalog)
    except Exception as exc:  # one program must never abort the suite
        logger.exception("episode for %s failed", prog.id)
        return ProgramResult(prog.id, None, None, None, False, None, f"{type(exc).__name__}: {exc}")
    sink.append(traj)
    res = traj.final_result
    if res is None or res.status != "success":
        reason = traj.error or (res.stderr_excerpt if res else traj.terminated_by)
        return ProgramResult(prog.id, res.ic_unopt if res else None, None, None, False, traj.final_sequence, reason)
    return ProgramResult(prog.id, res.ic_unopt, res.ic_after, res.delta_ic, bool(traj.rewards.answer),
                         traj.final_sequence)


def evaluate_method(
    manifest: BenchmarkManifest,
    method: str,
    env: CompilerEnv,
    kb: KnowledgeBase | None = None,
    *,
    make_policy: Callable[[str], Policy] | None = None,
    episode_cfg: EpisodeConfig | None = None,
    catalog: PassCatalog | None = None,
    workers: int = 4,
    trajectories: list[Trajectory] | None = None,
) -> list[SuiteReport]:
    catalog = catalog or (kb.symbolic if kb is not None else load_catalog())
    flags = method_sequence(method)
    if flags is None and make_policy is None:
        raise ValueError("the agent method needs a policy factory")
    sink = trajectories if trajectories is not None else []
    episode_cfg = episode_cfg or EpisodeConfig()

    def one(prog: Program) -> ProgramResult:
        if flags is not None:
            return _eval_fixed(env, prog, flags, catalog)
        return _eval_agent(env, prog, make_policy, kb, episode_cfg, catalog, sink)

    reports = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for name, progs in manifest.suites.items():
            rows = list(pool.map(one, progs))
            reports.append(SuiteReport(name, method, rows))
    return reports


def overall_average(reports: Sequence[SuiteReport]) -> float | None:
    """Mean over suites of the per-suite means."""
    avgs = [r.average_reduction for r in reports if r.average_reduction is not None]
    return sum(avgs) / len(avgs) if avgs else None


@dataclass
class Comparison:
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["suite", "program", "a", "b", "delta"], lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in w.fieldnames})
        return buf.getvalue()

    def to_table(self, label_a: str = "a", label_b: str = "b") -> str:
        def pct(x):
            return "n/a" if x is None else f"{x * 100:.2f}%"

        head = ("suite", "program", label_a, label_b, "delta")
        body = [(r["suite"], r["program"], pct(r["a"]), pct(r["b"]), pct(r["delta"])) for r in self.rows]
        widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
        fmt = "  ".join("{:<%d}" % w for w in widths)
        lines = [fmt.format(*head), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*row) for row in body]
        return "\n".join(lines)


def _delta(a: float | None, b: float | None) -> float | None:
    return None if a is None or b is None else a - b


def compare_report(a: Sequence[SuiteReport], b: Sequence[SuiteReport]) -> Comparison:
    """Per-program and per-suite reduction deltas (a minus b)."""
    ka = {(r.suite, p.id): p for r in a for p in r.per_program}
    kb_ = {(r.suite, p.id): p for r in b for p in r.per_program}
    if set(ka) != set(kb_):
        diff = sorted(set(ka) ^ set(kb_))
        raise MismatchedPrograms(f"program sets differ: {diff[:5]}")
    cmp = Comparison()
    by_suite_b = {r.suite: r for r in b}
    for ra in a:
        rb = by_suite_b[ra.suite]
        for p in ra.per_program:
            q = kb_[(ra.suite, p.id)]
            cmp.rows.append({"suite": ra.suite, "program": p.id, "a": p.reduction, "b": q.reduction,
                             "delta": _delta(p.reduction, q.reduction)})
        cmp.rows.append({"suite": ra.suite, "program": "Avg.", "a": ra.average_reduction,
                         "b": rb.average_reduction, "delta": _delta(ra.average_reduction, rb.average_reduction)})
    oa, ob = overall_average(a), overall_average(b)
    cmp.rows.append({"suite": "all", "program": "Avg.", "a": oa, "b": ob, "delta": _delta(oa, ob)})
    return cmp


@dataclass
class CaseStudy:
    program_id: str
    heuristic: list[str]
    heuristic_gain: float | None
    recommended: list[str] | None
    recommended_gain: float | None
    trajectory: Trajectory

    @property
    def knowledge_helped(self) -> bool:
        return (
            self.heuristic_gain is not None and self.recommended_gain is not None
            and self.recommended_gain > self.heuristic_gain
        )


def case_study(program_id: str, heuristic: Sequence[str], env: CompilerEnv, kb: KnowledgeBase,
               catalog: PassCatalog | None = None) -> CaseStudy:
    """Heuristic first attempt, then a knowledge-base recommendation, on one program."""
    from .agent.mocks import case_study_policy

    traj = run_episode(program_id, case_study_policy(heuristic), kb, env,
                       EpisodeConfig(write_back=False), catalog)
    tool_results = [t.blocks[0].body for t in traj.turns if t.role == "tool"]
    gains = [r.get("improvement_over_oz") for r in tool_results if "status" in r]
    rec = next((r["recommended_pass_sequence"] for r in tool_results if "recommended_pass_sequence" in r), None)
    return CaseStudy(
        program_id, list(heuristic),
        gains[0] if gains else None, rec,
        gains[1] if len(gains) > 1 else None,
        traj,
    )
