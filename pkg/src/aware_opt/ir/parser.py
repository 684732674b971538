"""Recursive-descent reader for the subset of textual LLVM IR the feature
counters need.

Module-level entities other than ``define``/``declare`` (globals, type
definitions, attribute groups, metadata) are skipped. Inside function bodies
every instruction is kept; opcodes without a dedicated grammar are retained
as opaque instructions with no decoded operands.
"""
from __future__ import annotations

import re

from .lexer import LexError, Token, bracket_depth, strip_comment, tokenize
from .model import (
    BINARY_OPS,
    CAST_OPS,
    TERMINATORS,
    IrBasicBlock,
    IrFunction,
    IrInstruction,
    IrModule,
    Opcode,
    Operand,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class _Bail(Exception):
    """Operand grammar did not match; keep what was decoded so far."""


_INT_TYPE_RE = re.compile(r"i(\d+)$")
_LABEL_RE = re.compile(r'^\s*((?:[-\w.$]+)|(?:"[^"]*")):(?:\s|$)')
_FUNC_NAME_RE = re.compile(r'@("[^"]*"|[-\w.$]+)\s*\(')

_PRIMITIVE_TYPES = frozenset(
    {
        "void", "half", "bfloat", "float", "double", "x86_fp80", "fp128",
        "ppc_fp128", "label", "metadata", "x86_mmx", "x86_amx", "token",
        "ptr", "opaque",
    }
)
_FAST_MATH = frozenset({"fast", "nnan", "ninf", "nsz", "arcp", "contract", "afn", "reassoc"})
_WRAP_FLAGS = frozenset({"nuw", "nsw", "exact", "disjoint"})
_CONSTEXPR_OPS = BINARY_OPS | CAST_OPS | frozenset(
    {"getelementptr", "select", "icmp", "fcmp", "extractvalue", "insertvalue",
     "extractelement", "insertelement", "shufflevector"}
)
_VALUE_WORDS = frozenset(
    {"true", "false", "null", "undef", "poison", "zeroinitializer", "none",
     "asm", "blockaddress", "dso_local_equivalent", "no_cfi", "splat"}
) | _CONSTEXPR_OPS
_INT_ARG_ATTRS = frozenset({"align", "cc", "alignstack", "dereferenceable", "dereferenceable_or_null"})
_CLOSERS = {"(": ")", "[": "]", "{": "}", "<": ">"}


def _strip_sigil(text: str) -> str:
    name = text[1:]
    if name.startswith('"') and name.endswith('"'):
        name = name[1:-1]
    return name


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def peek_text(self, offset: int = 0) -> str | None:
        tok = self.peek(offset)
        return tok.text if tok else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _Bail("unexpected end of instruction")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.peek_text() == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise _Bail(f"expected {text!r}")

    def skip_words(self, words: frozenset[str]) -> None:
        while self.peek_text() in words:
            self.i += 1

    def skip_group(self) -> None:
        opener = self.next().text
        closer = _CLOSERS[opener]
        depth = 1
        while depth:
            t = self.next().text
            if t == opener:
                depth += 1
            elif t == closer:
                depth -= 1


# -- types -----------------------------------------------------------------

def _is_type_start(tok: Token | None) -> bool:
    if tok is None:
        return False
    if tok.kind == "word":
        return tok.text in _PRIMITIVE_TYPES or bool(_INT_TYPE_RE.match(tok.text))
    return tok.kind == "local" or tok.text in ("[", "<", "{")


def _parse_type(c: _Cursor) -> tuple[str, int | None]:
    """Consume a type; returns (spelling of the base type, integer width or None)."""
    tok = c.next()
    width = None
    text = tok.text
    if tok.kind == "word":
        m = _INT_TYPE_RE.match(text)
        if m:
            width = int(m.group(1))
        elif text not in _PRIMITIVE_TYPES:
            raise _Bail(f"not a type: {text}")
        elif text == "ptr" and c.peek_text() == "addrspace":
            c.next()
            c.skip_group()
    elif tok.kind == "local":
        pass  # named struct type
    elif text == "[":
        c.i -= 1
        c.skip_group()
    elif text == "<":
        c.i -= 1
        c.skip_group()  # vector or packed struct <{ ... }>
    elif text == "{":
        c.i -= 1
        c.skip_group()
    else:
        raise _Bail(f"not a type: {text}")
    while True:
        nxt = c.peek_text()
        if nxt == "*":
            c.next()
            width = None
        elif nxt == "addrspace" and c.peek_text(1) == "(":
            c.next()
            c.skip_group()
        elif nxt == "(":  # function type
            c.skip_group()
            width = None
        else:
            break
    return text, width


def _skip_attrs(c: _Cursor) -> None:
    """Skip parameter/return attributes (``noundef``, ``align 8``, ``byval(T)``...)."""
    while True:
        tok = c.peek()
        if tok is None:
            return
        if tok.kind == "attrgrp":
            c.next()
            continue
        if tok.kind == "string" and c.peek_text(1) == "=":  # "key"="value"
            c.i += 3
            continue
        if tok.kind != "word" or tok.text in _VALUE_WORDS or _is_type_start(tok):
            return
        c.next()
        if c.peek_text() == "(":
            c.skip_group()
        elif tok.text in _INT_ARG_ATTRS and c.peek() is not None and c.peek().kind == "int":
            c.next()


def _skip_pre_type_attrs(c: _Cursor) -> None:
    while True:
        tok = c.peek()
        if tok is None or _is_type_start(tok) or tok.kind != "word":
            return
        c.next()
        if c.peek_text() == "(":
            c.skip_group()
        elif tok.text in _INT_ARG_ATTRS and c.peek() is not None and c.peek().kind == "int":
            c.next()


# -- values ----------------------------------------------------------------

def _parse_value(c: _Cursor, ty: str, width: int | None) -> Operand:
    tok = c.next()
    kind, text = tok.kind, tok.text
    if ty == "metadata":
        if kind == "meta":
            if c.peek_text() in ("(", "{"):
                c.skip_group()
            return Operand("metadata", text)
        c.i -= 1
        _parse_typed_value(c)
        return Operand("metadata", text)
    if kind == "local":
        return Operand("label" if ty == "label" else "local", text)
    if kind == "global":
        return Operand("global", text)
    if kind == "int":
        if width is None:
            return Operand("const_other", text)
        return Operand("const_int", text, width, int(text))
    if kind in ("fp", "hexfp"):
        return Operand("const_fp", text)
    if kind == "cstring":
        return Operand("const_other", text)
    if kind == "meta":
        if c.peek_text() in ("(", "{"):
            c.skip_group()
        return Operand("metadata", text)
    if text in ("true", "false"):
        return Operand("const_int", text, 1, 1 if text == "true" else 0)
    if text in ("null", "undef", "poison", "zeroinitializer", "none"):
        return Operand("const_other", text)
    if text in ("[", "{", "<"):
        c.i -= 1
        c.skip_group()
        return Operand("const_other", "<aggregate>")
    if text == "asm":
        while c.peek() is not None and c.peek().kind == "word":
            c.next()
        c.next()  # asm string
        c.expect(",")
        c.next()  # constraint string
        return Operand("other", "asm")
    if text in ("blockaddress", "dso_local_equivalent", "no_cfi", "splat"):
        if c.peek_text() == "(":
            c.skip_group()
        else:
            _parse_value(c, "ptr", None)
        return Operand("const_other", text)
    if text in _CONSTEXPR_OPS:
        while c.peek_text() != "(":
            c.next()
        c.skip_group()
        return Operand("const_other", text)
    raise _Bail(f"unrecognized value {text!r}")


def _parse_typed_value(c: _Cursor) -> Operand:
    ty, width = _parse_type(c)
    _skip_attrs(c)
    return _parse_value(c, ty, width)


# -- instructions ----------------------------------------------------------

def _decode_operands(op: str, c: _Cursor, inst: IrInstruction) -> None:
    out = inst.operands
    if op in BINARY_OPS:
        c.skip_words(_WRAP_FLAGS | _FAST_MATH)
        ty, w = _parse_type(c)
        out.append(_parse_value(c, ty, w))
        c.expect(",")
        out.append(_parse_value(c, ty, w))
    elif op == "fneg":
        c.skip_words(_FAST_MATH)
        ty, w = _parse_type(c)
        out.append(_parse_value(c, ty, w))
    elif op in ("icmp", "fcmp"):
        c.skip_words(_FAST_MATH)
        c.next()  # predicate
        ty, w = _parse_type(c)
        out.append(_parse_value(c, ty, w))
        c.expect(",")
        out.append(_parse_value(c, ty, w))
    elif op in CAST_OPS:
        out.append(_parse_typed_value(c))
    elif op == "select":
        c.skip_words(_FAST_MATH)
        out.append(_parse_typed_value(c))
        for _ in range(2):
            c.expect(",")
            out.append(_parse_typed_value(c))
    elif op == "ret":
        if c.peek_text() != "void":
            out.append(_parse_typed_value(c))
    elif op == "br":
        out.append(_parse_typed_value(c))
        while c.accept(","):
            if c.peek() is not None and c.peek().kind == "meta":
                break
            out.append(_parse_typed_value(c))
    elif op == "switch":
        out.append(_parse_typed_value(c))
        c.expect(",")
        out.append(_parse_typed_value(c))
        c.expect("[")
        while not c.accept("]"):
            out.append(_parse_typed_value(c))
            c.expect(",")
            out.append(_parse_typed_value(c))
    elif op == "indirectbr":
        out.append(_parse_typed_value(c))
        c.expect(",")
        c.expect("[")
        while not c.accept("]"):
            out.append(_parse_typed_value(c))
            c.accept(",")
    elif op == "phi":
        c.skip_words(_FAST_MATH)
        ty, w = _parse_type(c)
        while True:
            c.expect("[")
            out.append(_parse_value(c, ty, w))
            c.expect(",")
            c.next()  # incoming block
            c.expect("]")
            if not (c.accept(",") and c.peek_text() == "["):
                break
    elif op == "alloca":
        c.skip_words(frozenset({"inalloca", "swifterror"}))
        _parse_type(c)
        while c.accept(","):
            nxt = c.peek()
            if nxt is None or nxt.kind == "meta":
                break
            if nxt.text == "align":
                c.next()
                c.next()
            elif nxt.text == "addrspace":
                c.next()
                c.skip_group()
            else:
                out.append(_parse_typed_value(c))
    elif op == "load":
        c.skip_words(frozenset({"atomic", "volatile"}))
        _parse_type(c)
        c.expect(",")
        out.append(_parse_typed_value(c))
    elif op == "store":
        c.skip_words(frozenset({"atomic", "volatile"}))
        out.append(_parse_typed_value(c))
        c.expect(",")
        out.append(_parse_typed_value(c))
    elif op == "getelementptr":
        c.skip_words(frozenset({"inbounds"}))
        _parse_type(c)
        while c.accept(","):
            nxt = c.peek()
            if nxt is None or nxt.kind == "meta":
                break
            c.skip_words(frozenset({"inrange"}))
            out.append(_parse_typed_value(c))
    elif op in ("call", "invoke", "callbr"):
        _decode_call(c, inst)
    elif op == "extractvalue" or op == "freeze" or op == "resume":
        out.append(_parse_typed_value(c))
    elif op == "va_arg":
        out.append(_parse_typed_value(c))
    elif op in ("insertvalue", "extractelement"):
        out.append(_parse_typed_value(c))
        c.expect(",")
        out.append(_parse_typed_value(c))
    elif op in ("insertelement", "shufflevector"):
        out.append(_parse_typed_value(c))
        for _ in range(2):
            c.expect(",")
            out.append(_parse_typed_value(c))
    elif op == "atomicrmw":
        c.skip_words(frozenset({"volatile"}))
        c.next()  # operation
        out.append(_parse_typed_value(c))
        c.expect(",")
        out.append(_parse_typed_value(c))
    elif op == "cmpxchg":
        c.skip_words(frozenset({"weak", "volatile"}))
        out.append(_parse_typed_value(c))
        for _ in range(2):
            c.expect(",")
            out.append(_parse_typed_value(c))


def _decode_call(c: _Cursor, inst: IrInstruction) -> None:
    c.skip_words(_FAST_MATH)
    _skip_pre_type_attrs(c)
    start = c.i
    ty, _ = _parse_type(c)
    # Return type spelling without a trailing function-type parameter list;
    # "i32*" and "i32 addrspace(1)*" are pointers, "i32 (i8*, ...)" returns i32.
    after = c.toks[start + 1].text if start + 1 < len(c.toks) else None
    inst.result_type = ty if after not in ("*", "addrspace") else ty + "*"
    callee = _parse_value(c, "ptr", None)
    c.expect("(")
    args: list[Operand] = []
    while not c.accept(")"):
        args.append(_parse_typed_value(c))
        c.accept(",")
    inst.operands.extend(args)
    inst.operands.append(callee)


def _parse_instruction(tokens: list[Token], line_no: int) -> tuple[IrInstruction, str | None]:
    """Returns the instruction and its numeric result name, if any."""
    c = _Cursor(tokens)
    result = None
    if len(tokens) >= 2 and tokens[0].kind == "local" and tokens[1].text == "=":
        result = _strip_sigil(tokens[0].text)
        c.i = 2
    c.skip_words(frozenset({"tail", "musttail", "notail"}))
    op_tok = c.peek()
    if op_tok is None or op_tok.kind != "word":
        col = op_tok.col if op_tok else (tokens[-1].col if tokens else 1)
        raise ParseError("expected an instruction opcode", line_no, col)
    c.next()
    op = op_tok.text
    inst = IrInstruction(
        opcode=Opcode.classify(op),
        name=op,
        is_terminator=op in TERMINATORS,
        line=line_no,
    )
    try:
        _decode_operands(op, c, inst)
    except _Bail:
        pass  # keep the instruction; operand decoding is best-effort
    return inst, result


def _terminator_targets(tokens: list[Token]) -> list[str]:
    targets = []
    for a, b in zip(tokens, tokens[1:]):
        if a.text == "label" and b.kind == "local":
            targets.append(_strip_sigil(b.text))
    return targets


def _header_next_unnamed(tokens: list[Token]) -> int:
    """First implicit value number after the function's arguments."""
    start = None
    for k, tok in enumerate(tokens):
        if tok.kind == "global" and k + 1 < len(tokens) and tokens[k + 1].text == "(":
            start = k + 1
            break
    if start is None:
        return 0
    depth = 0
    chunks: list[list[Token]] = [[]]
    for tok in tokens[start:]:
        if tok.text in ("(", "[", "{", "<"):
            depth += 1
            if depth == 1:
                continue
        elif tok.text in (")", "]", "}", ">"):
            depth -= 1
            if depth == 0:
                break
        if depth == 1 and tok.text == ",":
            chunks.append([])
        else:
            chunks[-1].append(tok)
    counter = 0
    for chunk in chunks:
        if not chunk or chunk[-1].text == "...":
            continue
        last = chunk[-1]
        if last.kind == "local" and len(chunk) > 1:
            name = _strip_sigil(last.text)
            if name.isdigit():
                counter = int(name) + 1
        else:
            counter += 1
    return counter


class _FunctionBuilder:
    def __init__(self, name: str, line_no: int, next_unnamed: int):
        self.fn = IrFunction(name=name, is_external=False)
        self.line_no = line_no
        self.next_unnamed = next_unnamed
        self.block: IrBasicBlock | None = None
        self.targets: dict[str, tuple[list[str], int]] = {}

    def _check_open_block(self, line_no: int) -> None:
        b = self.block
        if b is not None and (not b.instructions or not b.instructions[-1].is_terminator):
            raise ParseError(f"block '{b.label}' has no terminator", line_no)

    def start_block(self, label: str, line_no: int) -> None:
        self._check_open_block(line_no)
        if label.isdigit():
            self.next_unnamed = int(label) + 1
        self.block = IrBasicBlock(label=label)
        self.fn.blocks.append(self.block)

    def add(self, tokens: list[Token], line_no: int) -> None:
        if self.block is None or (self.block.instructions and self.block.instructions[-1].is_terminator):
            self.start_block(str(self.next_unnamed), line_no)
        inst, result = _parse_instruction(tokens, line_no)
        if result is not None and result.isdigit():
            self.next_unnamed = int(result) + 1
        self.block.instructions.append(inst)
        if inst.is_terminator:
            self.targets[self.block.label] = (_terminator_targets(tokens), line_no)

    def finish(self, line_no: int) -> IrFunction:
        if not self.fn.blocks:
            raise ParseError(f"function @{self.fn.name} has an empty body", line_no)
        self._check_open_block(line_no)
        by_label = {b.label: b for b in self.fn.blocks}
        for b in self.fn.blocks:
            targets, tline = self.targets.get(b.label, ([], line_no))
            for t in targets:
                if t not in by_label:
                    raise ParseError(f"branch to undefined label '%{t}'", tline)
                b.successors.add(t)
                by_label[t].predecessors.add(b.label)
        return self.fn


def parse_ir(ir_text: str, source_name: str = "") -> IrModule:
    """Parse textual LLVM IR into an :class:`IrModule`."""
    module = IrModule(source_name=source_name)
    lines = ir_text.splitlines()
    builder: _FunctionBuilder | None = None
    i = 0
    n = len(lines)
    while i < n:
        line_no = i + 1
        raw = strip_comment(lines[i]).rstrip()
        i += 1
        text = raw.strip()
        if not text:
            continue

        if builder is None:
            word = text.split(None, 1)[0]
            if word == "define":
                header = text
                while not header.endswith("{") and i < n:
                    header += " " + strip_comment(lines[i]).strip()
                    i += 1
                if not header.endswith("{"):
                    raise ParseError("function header without '{'", line_no)
                m = _FUNC_NAME_RE.search(header)
                if m is None:
                    raise ParseError("function header without a name", line_no)
                try:
                    htoks = tokenize(header)
                except LexError as exc:
                    raise ParseError(str(exc), line_no, exc.column) from None
                builder = _FunctionBuilder(
                    _strip_sigil("@" + m.group(1)), line_no, _header_next_unnamed(htoks)
                )
            elif word == "declare":
                m = _FUNC_NAME_RE.search(text)
                if m is None:
                    raise ParseError("declaration without a name", line_no)
                module.functions.append(
                    IrFunction(name=_strip_sigil("@" + m.group(1)), is_external=True)
                )
            continue

        if text == "}":
            module.functions.append(builder.finish(line_no))
            builder = None
            continue

        m = _LABEL_RE.match(raw)
        if m is not None:
            label = m.group(1)
            if label.startswith('"'):
                label = label[1:-1]
            builder.start_block(label, line_no)
            text = raw[m.end():].strip()
            if not text:
                continue

        # Join continuation lines: open brackets (switch tables) and
        # landingpad clauses.
        while bracket_depth(text) > 0 and i < n:
            text += " " + strip_comment(lines[i]).strip()
            i += 1
        while i < n and strip_comment(lines[i]).strip().split(" ", 1)[0] in ("catch", "filter", "cleanup"):
            text += " " + strip_comment(lines[i]).strip()
            i += 1
        try:
            toks = tokenize(text)
        except LexError as exc:
            col = exc.column + (len(raw) - len(raw.lstrip()))
            raise ParseError(str(exc), line_no, col) from None
        builder.add(toks, line_no)

    if builder is not None:
        raise ParseError(f"unterminated body of function @{builder.fn.name}", builder.line_no)
    return module
