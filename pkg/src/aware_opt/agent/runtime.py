"""Multi-turn episode loop that drives a policy against the compiler tools."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Protocol, Sequence

from ..env import InstrCountResult, UnknownProgram
from ..ir import FeatureVector, deserialize_features, extract_features, parse_ir
from ..knowledge import EmpiricalEntry, EmptyStore, KnowledgeBase, KnowledgeBaseError
from ..passes import PassCatalog, RepairImpossible, UnknownPass, load_catalog, parse_flags, render_flags, repair_sequence
from ..reward import RewardBreakdown, RewardWeights, score_answer, score_format, score_performance, total_reward
from .policy import Policy, PolicyUnreachable
from .prompt import render_prompt
from .protocol import AgentTurn, parse_turn, tool_response_message, tool_turn

logger = logging.getLogger(__name__)


class EnvLike(Protocol):
    def resolve(self, program_id: str) -> Path: ...

    def instcount(self, program_id: str, flags: Sequence[str]) -> InstrCountResult: ...


@dataclass
class EpisodeConfig:
    k: int = 1
    alpha: float = 0.5
    repair: bool = False
    write_back: bool = True
    weights: RewardWeights = field(default_factory=RewardWeights)


@dataclass
class Trajectory:
    program_id: str
    prompt: str
    turns: list[AgentTurn]
    final_sequence: list[str] | None
    rewards: RewardBreakdown
    env_results: list[InstrCountResult]
    terminated_by: str  # answer | max_turns | protocol_error
    answer_from_retrieval: bool = False
    repaired: bool = False
    provenance: str = "policy"
    error: str | None = None

    @property
    def final_result(self) -> InstrCountResult | None:
        return self.env_results[-1] if self.terminated_by == "answer" and self.env_results else None

    def to_dict(self) -> dict:
        return {
            "program_id": self.program_id,
            "prompt": self.prompt,
            "turns": [t.to_dict() for t in self.turns],
            "final_sequence": self.final_sequence,
            "rewards": self.rewards.to_dict(),
            "env_results": [r.to_dict() for r in self.env_results],
            "terminated_by": self.terminated_by,
            "answer_from_retrieval": self.answer_from_retrieval,
            "repaired": self.repaired,
            "provenance": self.provenance,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(
            program_id=d["program_id"],
            prompt=d["prompt"],
            turns=[AgentTurn.from_dict(t) for t in d["turns"]],
            final_sequence=d.get("final_sequence"),
            rewards=RewardBreakdown.from_dict(d["rewards"]),
            env_results=[InstrCountResult(**r) for r in d.get("env_results", [])],
            terminated_by=d["terminated_by"],
            answer_from_retrieval=d.get("answer_from_retrieval", False),
            repaired=d.get("repaired", False),
            provenance=d.get("provenance", "policy"),
            error=d.get("error"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def messages(self) -> list[dict]:
        """The chat exchange as the policy saw it."""
        msgs = [{"role": "system", "content": self.prompt}]
        for t in self.turns:
            if t.role == "assistant":
                msgs.append({"role": "assistant", "content": t.raw})
            else:
                msgs.append({"role": "user", "content": tool_response_message(t.blocks[0].body)})
        return msgs


def write_trajectories(path: str | Path, trajectories: Iterable[Trajectory], append: bool = True) -> int:
    n = 0
    with open(path, "a" if append else "w") as fh:
        for t in trajectories:
            rec = t.to_dict()
            rec["logged_at"] = time.time()
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            n += 1
    return n


def read_trajectories(path: str | Path) -> Iterator[Trajectory]:
    with open(path) as fh:
        for line in fh:
            if line.strip():
                yield Trajectory.from_dict(json.loads(line))


def _features_from_query(query: Any) -> FeatureVector | None:
    try:
        if isinstance(query, dict):
            return FeatureVector.from_mapping(query)
        if isinstance(query, str):
            return deserialize_features(query)
    except (ValueError, TypeError):
        return None
    return None


def dispatch_tool(
    call: dict,
    kb: KnowledgeBase | None,
    env: EnvLike | None,
    *,
    default_features: FeatureVector | None = None,
    k: int = 1,
    alpha: float = 0.5,
) -> tuple[dict, InstrCountResult | None]:
    """Route one parsed tool call. Failures come back as in-band error objects."""
    name = call.get("name") if isinstance(call, dict) else None
    args = call.get("arguments", {}) if isinstance(call, dict) else {}
    if not isinstance(args, dict):
        return {"status": "error", "reason": "bad_arguments"}, None

    if name == "lightrag_compiler_optimization":
        if kb is None:
            return {"status": "error", "reason": "no_knowledge_base"}, None
        # A query that is not a feature object falls back to the episode's own features.
        fv = _features_from_query(args.get("query")) or default_features
        if fv is None:
            return {"status": "error", "reason": "bad_query"}, None
        try:
            ranked = kb.retrieve(fv, k, alpha).ranked
        except EmptyStore:
            return {"status": "error", "reason": "empty_knowledge_base"}, None
        top = ranked[0].entry
        resp = {
            "recommended_pass_sequence": render_flags(top.sequence, kb.symbolic),
            "performance_improvement": round(top.effect, 4),
        }
        if k > 1:
            resp["alternatives"] = [
                {"pass_sequence": render_flags(r.entry.sequence, kb.symbolic), "performance_improvement": round(r.entry.effect, 4)}
                for r in ranked[1:]
            ]
        return resp, None

    if name == "instrcount":
        if env is None:
            return {"status": "error", "reason": "no_environment"}, None
        program = args.get("filename")
        flags = args.get("optimization_flags")
        if not isinstance(program, str) or not isinstance(flags, list) or not all(isinstance(f, str) for f in flags):
            return {"status": "error", "reason": "bad_arguments"}, None
        try:
            result = env.instcount(program, flags)
        except UnknownProgram:
            return {"status": "error", "reason": "unknown_program"}, None
        return result.to_tool_response(), result

    return {"status": "error", "reason": "unknown_tool"}, None


def program_features(env: EnvLike, program_id: str) -> FeatureVector:
    path = env.resolve(program_id)
    return extract_features(parse_ir(Path(path).read_text(), source_name=str(path)))


def run_episode(
    program_id: str,
    policy: Policy,
    kb: KnowledgeBase | None,
    env: EnvLike,
    cfg: EpisodeConfig | None = None,
    catalog: PassCatalog | None = None,
) -> Trajectory:
    cfg = cfg or EpisodeConfig()
    catalog = catalog or (kb.symbolic if kb is not None else load_catalog())
    fv = program_features(env, program_id)
    prompt = render_prompt(fv, fv[51], program_id)
    messages: list[dict] = [{"role": "system", "content": prompt}]
    turns: list[AgentTurn] = []
    env_results: list[InstrCountResult] = []
    recommended: list[list[str]] = []
    answer: list[str] | None = None
    terminated_by = "max_turns"
    error = None

    for _ in range(policy.endpoint.max_turns):
        raw = policy.complete(messages)  # PolicyUnreachable propagates
        turn = parse_turn(raw)
        turns.append(turn)
        messages.append({"role": "assistant", "content": turn.raw})
        if not turn.well_formed:
            terminated_by, error = "protocol_error", "; ".join(
                turn.errors + [b.error for b in turn.blocks if b.error]
            )
            break
        if turn.answer is not None:
            answer = list(turn.answer.body)
            terminated_by = "answer"
            break
        if not turn.tool_calls:
            terminated_by, error = "protocol_error", "turn has neither a tool call nor an answer"
            break
        for block in turn.tool_calls:
            payload, result = dispatch_tool(
                block.body, kb, env, default_features=fv, k=cfg.k, alpha=cfg.alpha
            )
            if "recommended_pass_sequence" in payload:
                recommended.append(payload["recommended_pass_sequence"])
            if result is not None:
                env_results.append(result)
            turns.append(tool_turn(payload))
            messages.append({"role": "user", "content": tool_response_message(payload)})

    traj = Trajectory(program_id, prompt, turns, None, total_reward(0, 0, 0.0, cfg.weights), env_results,
                      terminated_by, error=error)
    if terminated_by != "answer":
        return traj

    flags = answer
    if cfg.repair:
        try:
            fixed = repair_sequence(parse_flags(flags, catalog), catalog)
            flags = render_flags(fixed.sequence, catalog)
            traj.repaired = flags != answer
        except (UnknownPass, RepairImpossible, ValueError) as exc:
            logger.info("repair failed for %s: %s", program_id, exc)
    traj.final_sequence = flags
    traj.answer_from_retrieval = any(flags == r for r in recommended)
    traj.provenance = "retrieval" if traj.answer_from_retrieval else "policy"

    final = env.instcount(program_id, flags)
    env_results.append(final)
    fmt = score_format(traj)
    ans = score_answer(flags, catalog, final)
    if final.status == "success":
        perf = score_performance(final.ic_unopt, final.ic_after)
        traj.rewards = total_reward(fmt, ans, perf, cfg.weights,
                                    performance_over_oz=final.improvement_over_oz, degenerate=final.degenerate)
    else:
        traj.rewards = total_reward(fmt, ans, None, cfg.weights)

    if kb is not None and cfg.write_back and final.status == "success" and ans:
        _write_back(kb, fv, parse_flags(flags, catalog), final, program_id)
    return traj


def _write_back(kb: KnowledgeBase, fv: FeatureVector, seq: tuple[int, ...], result: InstrCountResult,
                program_id: str) -> None:
    gain = result.improvement_over_oz
    try:
        if gain > 0:
            kb.insert_empirical(EmpiricalEntry(fv, seq, min(gain, 1.0), program_id, "episode"))
        elif gain < kb.epsilon:
            kb.insert_negative(seq, gain)
    except KnowledgeBaseError as exc:
        logger.info("knowledge write-back skipped for %s: %s", program_id, exc)


__all__ = [
    "EpisodeConfig", "Trajectory", "dispatch_tool", "run_episode", "program_features",
    "write_trajectories", "read_trajectories", "PolicyUnreachable",
]
