"""Scripted policies that replay the reference workflow without a model."""
from __future__ import annotations

import json
import re
from typing import Sequence

from .policy import Message, ScriptedPolicy

_FEATURES_RE = re.compile(r"LLVM IR features:\n(\{.*?\})\n", re.DOTALL)
_PROGRAM_RE = re.compile(r"Verify the sequence using instrcount with (\S+?)\.\n")
_RESPONSE_RE = re.compile(r"<tool_response>\s*(.*?)\s*</tool_response>", re.DOTALL)


def prompt_features(messages: Sequence[Message]) -> dict:
    m = _FEATURES_RE.search(messages[0]["content"])
    return json.loads(m.group(1)) if m else {}


def prompt_program(messages: Sequence[Message]) -> str:
    m = _PROGRAM_RE.search(messages[0]["content"])
    return m.group(1) if m else ""


def last_tool_response(messages: Sequence[Message]) -> dict:
    for msg in reversed(messages):
        if msg["role"] in ("user", "tool"):
            m = _RESPONSE_RE.search(msg["content"])
            if m:
                try:
                    return json.loads(m.group(1))
                except json.JSONDecodeError:
                    return {}
    return {}


def _call(name: str, arguments: dict) -> str:
    return "<tool_call>\n" + json.dumps({"name": name, "arguments": arguments}) + "\n</tool_call>"


def _answer(flags: Sequence[str]) -> str:
    return "<answer>\n" + json.dumps(list(flags)) + "\n</answer>"


def reference_policy(fallback: Sequence[str] = ("-Oz",), max_turns: int = 8) -> ScriptedPolicy:
    """think + retrieve, think + verify, answer with the retrieved sequence.

    If retrieval returns an error the verified and answered sequence is
    ``fallback``.
    """
    state: dict = {}

    def retrieve(messages):
        feats = prompt_features(messages)
        return (
            "<think> Analyzing the autophase features, I notice a high number of memory instructions "
            "and branches. I will prioritize memory and control-flow optimizations. </think>\n"
            + _call("lightrag_compiler_optimization", {"query": json.dumps(feats)})
        )

    def verify(messages):
        resp = last_tool_response(messages)
        state["flags"] = list(resp.get("recommended_pass_sequence") or fallback)
        return (
            "<think> I will verify the recommended sequence using the instrcount tool. </think>\n"
            + _call("instrcount", {"filename": prompt_program(messages), "optimization_flags": state["flags"]})
        )

    def answer(messages):
        return _answer(state["flags"])

    return ScriptedPolicy([retrieve, verify, answer], max_turns=max_turns)


def fixed_answer_policy(flags: Sequence[str], max_turns: int = 8) -> ScriptedPolicy:
    """Answer ``flags`` immediately after a short think block."""
    return ScriptedPolicy([f"<think> Applying a fixed sequence. </think>\n{_answer(flags)}"], max_turns=max_turns)


def case_study_policy(heuristic: Sequence[str], max_turns: int = 8) -> ScriptedPolicy:
    """Heuristic first attempt, then consult the knowledge base, then keep the better of the two."""
    state: dict = {"heuristic": list(heuristic)}

    def first_attempt(messages):
        return (
            "<think> Based on the features alone I will try a heuristic sequence first. </think>\n"
            + _call("instrcount", {"filename": prompt_program(messages), "optimization_flags": state["heuristic"]})
        )

    def consult(messages):
        state["heuristic_gain"] = last_tool_response(messages).get("improvement_over_oz", float("-inf"))
        return (
            "<think> The heuristic did not beat the baseline clearly; I will query the knowledge base. </think>\n"
            + _call("lightrag_compiler_optimization", {"query": json.dumps(prompt_features(messages))})
        )

    def verify(messages):
        resp = last_tool_response(messages)
        state["recommended"] = list(resp.get("recommended_pass_sequence") or state["heuristic"])
        return (
            "<think> Verifying the recommended sequence. </think>\n"
            + _call("instrcount", {"filename": prompt_program(messages), "optimization_flags": state["recommended"]})
        )

    def answer(messages):
        gain = last_tool_response(messages).get("improvement_over_oz", float("-inf"))
        best = state["recommended"] if gain > state["heuristic_gain"] else state["heuristic"]
        return "<think> Choosing the sequence with the larger improvement. </think>\n" + _answer(best)

    return ScriptedPolicy([first_attempt, consult, verify, answer], max_turns=max_turns)
