"""Policy endpoints: scripted mocks and an OpenAI-compatible chat client."""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, Union

import httpx

logger = logging.getLogger(__name__)

Message = dict  # {"role": ..., "content": ...}


class PolicyError(Exception):
    pass


class PolicyUnreachable(PolicyError):
    pass


class MalformedResponse(PolicyError):
    pass


@dataclass
class PolicyEndpoint:
    kind: str = "scripted_mock"  # remote_chat | scripted_mock
    endpoint_url: str | None = None
    model_name: str | None = None
    max_turns: int = 8
    temperature: float = 0.0
    api_key: str | None = None
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.kind not in ("remote_chat", "scripted_mock"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == "remote_chat" and not self.endpoint_url:
            raise ValueError("remote_chat requires endpoint_url")
        if self.max_turns < 1:
            raise ValueError("max_turns must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "PolicyEndpoint":
        kw = {
            "kind": "remote_chat",
            "endpoint_url": os.environ.get("AWARE_LLM_URL"),
            "model_name": os.environ.get("AWARE_LLM_MODEL", "default"),
            "api_key": os.environ.get("AWARE_LLM_KEY"),
        }
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)


class Policy(Protocol):
    endpoint: PolicyEndpoint

    def complete(self, messages: Sequence[Message]) -> str: ...


ScriptStep = Union[str, Callable[[Sequence[Message]], str]]


class ScriptedPolicy:
    """Replays a fixed list of replies; callables see the conversation so far.

    Once the script is exhausted every further reply is empty, which the
    runtime records as a protocol error.
    """

    def __init__(self, script: Sequence[ScriptStep], max_turns: int = 8):
        self.script = list(script)
        self.endpoint = PolicyEndpoint("scripted_mock", max_turns=max_turns)
        self._i = 0

    def complete(self, messages: Sequence[Message]) -> str:
        if self._i >= len(self.script):
            return ""
        step = self.script[self._i]
        self._i += 1
        return step(messages) if callable(step) else step


def chat_url(base: str) -> str:
    base = base.rstrip("/")
    return base if base.endswith("/chat/completions") else base + "/chat/completions"


def remote_chat(
    conversation: Sequence[Message],
    policy: PolicyEndpoint,
    *,
    client: httpx.Client | None = None,
    attempts: int = 3,
    backoff: float = 0.5,
) -> str:
    """POST one chat-completion request and return the assistant content."""
    if policy.kind != "remote_chat" or not policy.endpoint_url:
        raise ValueError("remote_chat needs a remote_chat endpoint with a URL")
    payload = {
        "model": policy.model_name or "default",
        "messages": list(conversation),
        "temperature": policy.temperature,
    }
    headers = {"Content-Type": "application/json"}
    if policy.api_key:
        headers["Authorization"] = f"Bearer {policy.api_key}"
    own = client is None
    client = client or httpx.Client(timeout=policy.timeout)
    last = ""
    try:
        for attempt in range(attempts):
            if attempt:
                time.sleep(backoff * 2 ** (attempt - 1))
            try:
                resp = client.post(chat_url(policy.endpoint_url), json=payload, headers=headers)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                logger.warning("chat request failed (attempt %d/%d): %s", attempt + 1, attempts, last)
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last = f"HTTP {resp.status_code}"
                logger.warning("chat request failed (attempt %d/%d): %s", attempt + 1, attempts, last)
                continue
            if resp.status_code >= 400:
                raise PolicyUnreachable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return _extract_content(resp)
    finally:
        if own:
            client.close()
    raise PolicyUnreachable(f"no reply after {attempts} attempts ({last})")


def _extract_content(resp: httpx.Response) -> str:
    try:
        data = resp.json()
        content = data["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"unexpected chat response: {exc!r}") from None
    if not isinstance(content, str):
        raise MalformedResponse("assistant content is not a string")
    return content


class RemoteChatPolicy:
    def __init__(self, endpoint: PolicyEndpoint, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.client = client

    def complete(self, messages: Sequence[Message]) -> str:
        return remote_chat(messages, self.endpoint, client=self.client)
