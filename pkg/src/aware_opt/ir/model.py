from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Opcode(str, Enum):
    """Opcodes the feature counters distinguish; everything else is OTHER."""

    ADD = "add"
    ALLOCA = "alloca"
    AND = "and"
    ASHR = "ashr"
    BITCAST = "bitcast"
    BR = "br"
    CALL = "call"
    GETELEMENTPTR = "getelementptr"
    ICMP = "icmp"
    LOAD = "load"
    LSHR = "lshr"
    MUL = "mul"
    OR = "or"
    PHI = "phi"
    RET = "ret"
    SEXT = "sext"
    SELECT = "select"
    SHL = "shl"
    STORE = "store"
    SUB = "sub"
    TRUNC = "trunc"
    XOR = "xor"
    ZEXT = "zext"
    OTHER = "other"

    @classmethod
    def classify(cls, name: str) -> "Opcode":
        try:
            return cls(name)
        except ValueError:
            return cls.OTHER


TERMINATORS = frozenset(
    {
        "ret", "br", "switch", "indirectbr", "invoke", "callbr", "resume",
        "catchswitch", "catchret", "cleanupret", "unreachable",
    }
)

BINARY_OPS = frozenset(
    {
        "add", "sub", "mul", "udiv", "sdiv", "urem", "srem", "shl", "lshr",
        "ashr", "and", "or", "xor", "fadd", "fsub", "fmul", "fdiv", "frem",
    }
)

CAST_OPS = frozenset(
    {
        "trunc", "zext", "sext", "fptrunc", "fpext", "fptoui", "fptosi",
        "uitofp", "sitofp", "ptrtoint", "inttoptr", "bitcast", "addrspacecast",
    }
)

# llvm::UnaryInstruction subclasses plus the fneg UnaryOperator.
UNARY_OPS = CAST_OPS | {"alloca", "load", "va_arg", "extractvalue", "freeze", "fneg"}

MEMORY_OPS = frozenset({"load", "store", "alloca", "getelementptr"})


@dataclass(frozen=True)
class Operand:
    """One operand occurrence.

    kind is one of ``const_int``, ``const_fp``, ``const_other``, ``local``,
    ``global``, ``label``, ``metadata``, ``other``. Integer constants carry
    their bit width and value.
    """

    kind: str
    text: str
    bit_width: int | None = None
    value: int | None = None

    @property
    def is_constant(self) -> bool:
        return self.kind in ("const_int", "const_fp", "const_other")


@dataclass
class IrInstruction:
    opcode: Opcode
    name: str  # raw opcode mnemonic, kept for OTHER
    operands: list[Operand] = field(default_factory=list)
    is_terminator: bool = False
    result_type: str | None = None  # call return type, when known
    line: int = 0


@dataclass
class IrBasicBlock:
    label: str
    instructions: list[IrInstruction] = field(default_factory=list)
    predecessors: set[str] = field(default_factory=set)
    successors: set[str] = field(default_factory=set)


@dataclass
class IrFunction:
    name: str
    is_external: bool
    blocks: list[IrBasicBlock] = field(default_factory=list)


@dataclass
class IrModule:
    functions: list[IrFunction] = field(default_factory=list)
    source_name: str = ""

    def instruction_count(self) -> int:
        return sum(len(b.instructions) for f in self.functions for b in f.blocks)
