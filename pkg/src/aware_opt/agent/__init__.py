"""Agent runtime: prompts and the turn protocol, plus tool dispatch over scripted or remote policies."""
from .mocks import reference_policy, case_study_policy, fixed_answer_policy
from .policy import (
    MalformedResponse,
    PolicyEndpoint,
    PolicyUnreachable,
    RemoteChatPolicy,
    ScriptedPolicy,
    remote_chat,
)
from .prompt import TemplateError, render_prompt
from .protocol import AgentTurn, Block, parse_turn
from .runtime import EpisodeConfig, Trajectory, dispatch_tool, read_trajectories, run_episode, write_trajectories

__all__ = [
    "AgentTurn", "Block", "EpisodeConfig", "MalformedResponse", "PolicyEndpoint", "PolicyUnreachable",
    "RemoteChatPolicy", "ScriptedPolicy", "TemplateError", "Trajectory", "reference_policy",
    "case_study_policy", "dispatch_tool", "fixed_answer_policy", "parse_turn", "read_trajectories",
    "remote_chat", "render_prompt", "run_episode", "write_trajectories",
]
