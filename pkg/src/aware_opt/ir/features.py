"""The 56 AutoPhase static features."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterator, Mapping

from .model import BINARY_OPS, MEMORY_OPS, UNARY_OPS, IrModule, Opcode

NUM_FEATURES = 56


@lru_cache(maxsize=None)
def _load_feature_table() -> tuple[int, tuple[str, ...], tuple[str, ...]]:
    raw = resources.files("aware_opt.data").joinpath("autophase_features.json").read_text()
    doc = json.loads(raw)
    rows = sorted(doc["features"], key=lambda r: r["index"])
    if [r["index"] for r in rows] != list(range(NUM_FEATURES)):
        raise RuntimeError("autophase_features.json must list indices 0..55 exactly once")
    return doc["version"], tuple(r["key"] for r in rows), tuple(r["description"] for r in rows)


FEATURE_TABLE_VERSION, FEATURE_NAMES, FEATURE_DESCRIPTIONS = _load_feature_table()
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

# Opcode counters, by feature index.
_OPCODE_FEATURES = {
    Opcode.ASHR: 25, Opcode.ADD: 26, Opcode.ALLOCA: 27, Opcode.AND: 28,
    Opcode.BITCAST: 31, Opcode.BR: 32, Opcode.CALL: 33, Opcode.GETELEMENTPTR: 34,
    Opcode.ICMP: 35, Opcode.LSHR: 36, Opcode.LOAD: 37, Opcode.MUL: 38,
    Opcode.OR: 39, Opcode.PHI: 40, Opcode.RET: 41, Opcode.SEXT: 42,
    Opcode.SELECT: 43, Opcode.SHL: 44, Opcode.STORE: 45, Opcode.SUB: 46,
    Opcode.TRUNC: 47, Opcode.XOR: 48, Opcode.ZEXT: 49,
}


@dataclass(frozen=True)
class FeatureVector:
    """Immutable 56-entry count vector in AutoPhase index order."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.values) != NUM_FEATURES:
            raise ValueError(f"expected {NUM_FEATURES} features, got {len(self.values)}")
        if any((not isinstance(v, int)) or v < 0 for v in self.values):
            raise ValueError("feature counts must be non-negative integers")

    @classmethod
    def zeros(cls) -> "FeatureVector":
        return cls((0,) * NUM_FEATURES)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int]) -> "FeatureVector":
        missing = set(FEATURE_NAMES) - set(mapping)
        extra = set(mapping) - set(FEATURE_NAMES)
        if missing or extra:
            raise ValueError(f"feature keys mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        return cls(tuple(int(mapping[k]) for k in FEATURE_NAMES))

    def __getitem__(self, key: int | str) -> int:
        if isinstance(key, str):
            key = FEATURE_INDEX[key]
        return self.values[key]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __len__(self) -> int:
        return NUM_FEATURES

    def as_dict(self) -> dict[str, int]:
        return dict(zip(FEATURE_NAMES, self.values))


def extract_features(module: IrModule) -> FeatureVector:
    """Count the 56 AutoPhase features over a parsed module.

    Constants are counted per operand occurrence; the bit-width counters
    (32/64) and the value counters (0/1) are independent, so ``i32 0``
    contributes to both. Critical edges run from a block with more than one
    successor to a block with more than one predecessor.
    """
    v = [0] * NUM_FEATURES
    for fn in module.functions:
        if fn.is_external:
            continue
        v[53] += 1
        n_preds = {bb.label: len(bb.predecessors) for bb in fn.blocks}
        for bb in fn.blocks:
            v[50] += 1
            n_pred = len(bb.predecessors)
            n_succ = len(bb.successors)
            v[18] += n_succ
            v[2] += n_pred == 1
            v[3] += n_pred == 1 and n_succ == 1
            v[4] += n_pred == 1 and n_succ == 2
            v[5] += n_succ == 1
            v[6] += n_pred == 2
            v[7] += n_pred == 2 and n_succ == 1
            v[8] += n_pred == 2 and n_succ == 2
            v[9] += n_succ == 2
            v[10] += n_pred > 2

            n_insts = len(bb.instructions)
            v[29] += 15 <= n_insts <= 500
            v[30] += n_insts < 15

            phis = 0
            phi_args = 0
            leading_phis = 0
            at_start = True
            for inst in bb.instructions:
                name = inst.name
                if inst.opcode is Opcode.PHI:
                    phis += 1
                    phi_args += len(inst.operands)
                    if at_start:
                        leading_phis += 1
                else:
                    at_start = False

                v[51] += 1
                idx = _OPCODE_FEATURES.get(inst.opcode)
                if idx is not None:
                    v[idx] += 1
                if name in MEMORY_OPS:
                    v[52] += 1
                if name in UNARY_OPS:
                    v[55] += 1
                if inst.opcode is Opcode.BR:
                    v[15] += 1
                    if len(inst.operands) == 1:
                        v[23] += 1
                elif inst.opcode is Opcode.CALL:
                    rt = inst.result_type or ""
                    if rt.startswith("i") and rt[1:].isdigit():
                        v[16] += 1
                if name in BINARY_OPS and any(op.is_constant for op in inst.operands):
                    v[24] += 1
                for op in inst.operands:
                    if op.kind != "const_int":
                        continue
                    if op.bit_width == 32:
                        v[19] += 1
                    elif op.bit_width == 64:
                        v[20] += 1
                    if op.value == 0:
                        v[21] += 1
                    elif op.value == 1:
                        v[22] += 1

            v[54] += phi_args
            v[14] += leading_phis
            v[0] += phi_args > 5
            v[1] += 1 <= phi_args <= 5
            v[11] += 0 < phis <= 3
            v[12] += phis > 3
            v[13] += phis == 0

            for succ in bb.successors:
                if n_succ > 1 and n_preds[succ] > 1:
                    v[17] += 1
    return FeatureVector(tuple(int(x) for x in v))


def serialize_features(fv: FeatureVector) -> str:
    return json.dumps(fv.as_dict())


def deserialize_features(text: str) -> FeatureVector:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("feature JSON must be an object")
    return FeatureVector.from_mapping(data)
