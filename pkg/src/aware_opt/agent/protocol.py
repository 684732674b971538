"""The <think>/<tool_call>/<answer> turn protocol."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

TOOL_NAMES = ("lightrag_compiler_optimization", "instrcount")
ASSISTANT_KINDS = ("think", "tool_call", "answer")

_BLOCK_RE = re.compile(r"<(think|tool_call|tool_response|answer)>(.*?)</\1>", re.DOTALL)
_TAG_RE = re.compile(r"</?(think|tool_call|tool_response|answer)>")
# Chat-template markers a model may echo back; they carry no content.
_MARKER_RE = re.compile(r"<\|im_start\|>\s*(assistant|user|system)?|<\|im_end\|>")


@dataclass
class Block:
    kind: str
    body: Any  # text for think, parsed JSON for tool_call/answer when well formed
    raw: str = ""
    error: str | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "body": self.body, "raw": self.raw, "error": self.error}

    @classmethod
    def from_dict(cls, d: dict) -> "Block":
        return cls(d["kind"], d.get("body"), d.get("raw", ""), d.get("error"))


@dataclass
class AgentTurn:
    role: str  # assistant | tool
    blocks: list[Block] = field(default_factory=list)
    raw: str = ""
    errors: list[str] = field(default_factory=list)

    @property
    def well_formed(self) -> bool:
        return not self.errors and all(b.error is None for b in self.blocks)

    @property
    def tool_calls(self) -> list[Block]:
        return [b for b in self.blocks if b.kind == "tool_call"]

    @property
    def answer(self) -> Block | None:
        answers = [b for b in self.blocks if b.kind == "answer"]
        return answers[-1] if answers else None

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "raw": self.raw,
            "blocks": [b.to_dict() for b in self.blocks],
            "errors": list(self.errors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentTurn":
        return cls(d["role"], [Block.from_dict(b) for b in d.get("blocks", [])], d.get("raw", ""),
                   list(d.get("errors", [])))


def _parse_tool_call(text: str) -> tuple[Any, str | None]:
    try:
        body = json.loads(text)
    except json.JSONDecodeError:
        return text, "tool_call body is not JSON"
    if not isinstance(body, dict) or not isinstance(body.get("name"), str):
        return body, "tool_call must be an object with a string 'name'"
    if not isinstance(body.get("arguments", {}), dict):
        return body, "tool_call 'arguments' must be an object"
    if body["name"] not in TOOL_NAMES:
        return body, f"unregistered tool {body['name']!r}"
    return body, None


def _parse_answer(text: str) -> tuple[Any, str | None]:
    try:
        body = json.loads(text)
    except json.JSONDecodeError:
        return text, "answer body is not JSON"
    if not isinstance(body, list) or not all(isinstance(x, str) for x in body):
        return body, "answer must be a JSON list of strings"
    return body, None


def parse_turn(raw: str) -> AgentTurn:
    """Split one assistant message into tagged blocks. Never raises."""
    turn = AgentTurn("assistant", raw=raw if isinstance(raw, str) else "")
    text = _MARKER_RE.sub("", turn.raw)
    pos = 0
    for m in _BLOCK_RE.finditer(text):
        gap = text[pos:m.start()]
        if gap.strip():
            turn.errors.append(f"text outside tags at offset {pos}")
        pos = m.end()
        kind, inner = m.group(1), m.group(2).strip()
        if _TAG_RE.search(inner):
            turn.blocks.append(Block(kind, inner, inner, "nested tag"))
        elif kind == "think":
            turn.blocks.append(Block("think", inner, inner))
        elif kind == "tool_call":
            body, err = _parse_tool_call(inner)
            turn.blocks.append(Block("tool_call", body, inner, err))
        elif kind == "answer":
            body, err = _parse_answer(inner)
            turn.blocks.append(Block("answer", body, inner, err))
        else:
            turn.blocks.append(Block(kind, inner, inner, "tool_response in an assistant turn"))
    tail = text[pos:]
    if _TAG_RE.search(tail):
        turn.errors.append("unclosed tag")
    elif tail.strip():
        turn.errors.append(f"text outside tags at offset {pos}")
    if not turn.blocks:
        turn.errors.append("no tagged blocks")
    return turn


def tool_turn(payload: dict) -> AgentTurn:
    body = json.dumps(payload, sort_keys=False)
    return AgentTurn("tool", [Block("tool_response", payload, body)], raw=body)


def tool_response_message(payload: dict) -> str:
    return f"<tool_response>\n{json.dumps(payload)}\n</tool_response>"
