"""Turn trajectories into dataset records and SFT chat samples."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .agent.protocol import tool_response_message
from .agent.runtime import Trajectory


class DatasetError(Exception):
    pass


class IncompleteTrajectory(DatasetError):
    pass


class RejectedSample(DatasetError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def format_percent(x: float) -> str:
    return f"{x * 100:.2f}%"


@dataclass
class DatasetRecord:
    program_representation: dict[str, int]
    reasoning_process: str
    pass_sequence: list[str]
    status: str
    improvement_over_oz: float
    program_id: str = ""
    provenance: str = "policy"

    def to_dict(self) -> dict:
        return {
            "Program Representation": self.program_representation,
            "Reasoning Process": self.reasoning_process,
            "Pass Sequence": list(self.pass_sequence),
            "Optimization Effect": {
                "Status": self.status,
                "Improvement (over_oz)": format_percent(self.improvement_over_oz),
                "improvement_over_oz": self.improvement_over_oz,
            },
            "program_id": self.program_id,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        eff = d["Optimization Effect"]
        return cls(
            program_representation=dict(d["Program Representation"]),
            reasoning_process=d["Reasoning Process"],
            pass_sequence=list(d["Pass Sequence"]),
            status=eff["Status"],
            improvement_over_oz=float(eff["improvement_over_oz"]),
            program_id=d.get("program_id", ""),
            provenance=d.get("provenance", "policy"),
        )


@dataclass
class SftSample:
    messages: list[dict]
    weightable_turns: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"messages": self.messages, "weightable_turns": self.weightable_turns}


def _prompt_features(t: Trajectory) -> dict[str, int]:
    marker = "LLVM IR features:\n"
    start = t.prompt.find(marker)
    if start < 0:
        raise IncompleteTrajectory("prompt carries no feature block")
    line = t.prompt[start + len(marker):].split("\n", 1)[0]
    return json.loads(line)


def trajectory_to_record(t: Trajectory) -> DatasetRecord:
    if t.terminated_by != "answer" or t.final_sequence is None or t.final_result is None:
        raise IncompleteTrajectory(f"trajectory for {t.program_id} ended by {t.terminated_by}")
    thoughts = [b.body for turn in t.turns if turn.role == "assistant" for b in turn.blocks if b.kind == "think"]
    res = t.final_result
    return DatasetRecord(
        program_representation=_prompt_features(t),
        reasoning_process="\n".join(thoughts),
        pass_sequence=list(t.final_sequence),
        status=res.status,
        improvement_over_oz=res.improvement_over_oz,
        program_id=t.program_id,
        provenance=t.provenance,
    )


def trajectory_to_sft(t: Trajectory) -> SftSample:
    if t.rewards.format != 1:
        raise RejectedSample("format reward is 0")
    if t.rewards.answer != 1:
        raise RejectedSample("answer reward is 0")
    messages = [{"role": "system", "content": t.prompt}]
    weightable = []
    for turn in t.turns:
        if turn.role == "assistant":
            weightable.append(len(messages))
            messages.append({"role": "assistant", "content": turn.raw})
        else:
            messages.append({"role": "tool", "content": tool_response_message(turn.blocks[0].body)})
    return SftSample(messages, weightable)


def filter_dataset(records: Sequence[DatasetRecord], min_effect: float) -> list[DatasetRecord]:
    if not -1.0 <= min_effect <= 1.0:
        raise ValueError("min_effect must lie in [-1, 1]")
    return [r for r in records if r.improvement_over_oz >= min_effect]


@dataclass
class BuildSummary:
    records: int = 0
    sft: int = 0
    rejected: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str) -> None:
        self.rejected[reason] = self.rejected.get(reason, 0) + 1


def build_dataset(
    trajectories: Iterable[Trajectory],
    records_out=None,
    sft_out=None,
    min_effect: float = -1.0,
) -> BuildSummary:
    """Write one JSONL line per accepted record / SFT sample to the given file objects."""
    summary = BuildSummary()
    for t in trajectories:
        try:
            rec = trajectory_to_record(t)
        except IncompleteTrajectory:
            summary.reject(f"incomplete: {t.terminated_by}")
            continue
        if not filter_dataset([rec], min_effect):
            summary.reject("below min_effect")
            continue
        if records_out is not None:
            records_out.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
        summary.records += 1
        try:
            sample = trajectory_to_sft(t)
        except RejectedSample as exc:
            summary.reject(f"sft: {exc.reason}")
            continue
        if sft_out is not None:
            sft_out.write(json.dumps(sample.to_dict(), sort_keys=True) + "\n")
        summary.sft += 1
    return summary
