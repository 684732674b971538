from .features import (
    FEATURE_NAMES,
    FeatureVector,
    deserialize_features,
    extract_features,
    serialize_features,
)
from .model import IrBasicBlock, IrFunction, IrInstruction, IrModule, Opcode, Operand
from .parser import ParseError, parse_ir

__all__ = [
    "FEATURE_NAMES",
    "FeatureVector",
    "IrBasicBlock",
    "IrFunction",
    "IrInstruction",
    "IrModule",
    "Opcode",
    "Operand",
    "ParseError",
    "deserialize_features",
    "extract_features",
    "parse_ir",
    "serialize_features",
]
