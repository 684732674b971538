"""Composite reward combining protocol compliance with code-size reduction."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Sequence

from .passes import PassCatalog, UnknownPass, parse_flags, validate_sequence

if TYPE_CHECKING:
    from .agent.runtime import Trajectory
    from .env import InstrCountResult


@dataclass(frozen=True)
class RewardWeights:
    w_format: float = 0.1
    w_answer: float = 0.2
    w_performance: float = 0.7

    def __post_init__(self) -> None:
        if min(self.w_format, self.w_answer, self.w_performance) < 0:
            raise ValueError("reward weights must be nonnegative")


@dataclass
class RewardBreakdown:
    format: int
    answer: int
    performance: float
    total: float
    weights: RewardWeights = field(default_factory=RewardWeights)
    performance_over_oz: float | None = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RewardBreakdown":
        d = dict(d)
        d["weights"] = RewardWeights(**d.get("weights", {}))
        return cls(**d)


def score_format(trajectory: "Trajectory") -> int:
    """1 iff every assistant turn is cleanly tagged and the transcript ends in exactly one answer."""
    assistant = [t for t in trajectory.turns if t.role == "assistant"]
    if not assistant:
        return 0
    answers = 0
    for turn in assistant:
        if not turn.well_formed:
            return 0
        answers += sum(b.kind == "answer" for b in turn.blocks)
    if answers != 1:
        return 0
    last = assistant[-1]
    return int(last.blocks[-1].kind == "answer")


def score_answer(answer_flags: Sequence[str], catalog: PassCatalog, env_result: "InstrCountResult | None") -> int:
    if not all(isinstance(f, str) for f in answer_flags):
        return 0
    try:
        seq = parse_flags(list(answer_flags), catalog)
    except (UnknownPass, ValueError):
        return 0
    if not validate_sequence(seq, catalog).valid:
        return 0
    return int(env_result is not None and env_result.status == "success")


def performance_ratio(ic_before: int, ic_after: int) -> tuple[float, bool]:
    if ic_before <= 0:
        return 0.0, True
    return (ic_before - ic_after) / ic_before, False


def score_performance(ic_before: int, ic_after: int) -> float:
    """(ic_before - ic_after) / ic_before; 0 when ic_before is not positive."""
    return performance_ratio(ic_before, ic_after)[0]


def total_reward(
    format: int,
    answer: int,
    performance: float | None,
    weights: RewardWeights | None = None,
    *,
    performance_over_oz: float | None = None,
    degenerate: bool = False,
) -> RewardBreakdown:
    w = weights or RewardWeights()
    fmt = 1 if format else 0
    ans = 1 if (answer and fmt) else 0
    perf = 0.0 if performance is None else float(performance)
    total = w.w_format * fmt + w.w_answer * ans + w.w_performance * perf
    return RewardBreakdown(fmt, ans, perf, total, w, performance_over_oz, degenerate)


@dataclass(frozen=True)
class DiscountedReturn:
    gamma: float
    per_turn_rewards: tuple[float, ...]
    return_value: float

    @classmethod
    def of(cls, rewards: Sequence[float], gamma: float = 1.0) -> "DiscountedReturn":
        return cls(gamma, tuple(rewards), discounted_return(rewards, gamma))


def discounted_return(rewards: Sequence[float], gamma: float = 1.0) -> float:
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return sum(r * gamma**t for t, r in enumerate(rewards))


def turn_rewards(trajectory: "Trajectory") -> list[float]:
    """Sparse reward stream: zero on every assistant turn except the last, which carries the total."""
    n = sum(t.role == "assistant" for t in trajectory.turns)
    if n == 0:
        return []
    return [0.0] * (n - 1) + [trajectory.rewards.total]
