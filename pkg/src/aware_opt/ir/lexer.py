"""Tokenizer for single logical lines of textual LLVM IR."""
from __future__ import annotations

import re
from dataclasses import dataclass

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<local>%(?:"[^"]*"|[-\w.$]+))
  | (?P<global>@(?:"[^"]*"|[-\w.$]+))
  | (?P<meta>!(?:"[^"]*"|[-\w.$\\]+)?)
  | (?P<attrgrp>\#\d+)
  | (?P<cstring>c"[^"]*")
  | (?P<string>"[^"]*")
  | (?P<hexfp>0x[KLMHR]?[0-9A-Fa-f]+)
  | (?P<fp>[-+]?\d+\.\d*(?:[eE][-+]?\d+)?)
  | (?P<int>[-+]?\d+)
  | (?P<word>[A-Za-z_$.][-\w.$]*)
  | (?P<ellipsis>\.\.\.)
  | (?P<punct>[,()\[\]{}<>*=:])
    """,
    re.VERBOSE,
)


class LexError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    col: int  # 1-based, relative to the logical line


def tokenize(line: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(line)
    while pos < n:
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise LexError(f"unexpected character {line[pos]!r}", pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


def strip_comment(line: str) -> str:
    """Drop a trailing ``;`` comment, ignoring semicolons inside quoted strings."""
    if ";" not in line:
        return line
    in_str = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_str = not in_str
        elif ch == ";" and not in_str:
            return line[:i]
    return line


def bracket_depth(line: str) -> int:
    """Net count of open ``( [ {`` outside strings."""
    depth = 0
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        elif in_str:
            continue
        elif ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
    return depth
