"""Functional translation into a dataflow IR, its verifier and emitters."""

from qimp.lowering.emit import emit_ir_json, emit_ir_text, emit_program_text, ir_to_json
from qimp.lowering.ir import DataflowGraph, FunctionGraph, LoweredSig, Node, Region, Val, Wire
from qimp.lowering.lower import lower_function, lower_program, lower_signature
from qimp.lowering.verify import IrViolation, verify_ir

__all__ = [
    "DataflowGraph",
    "FunctionGraph",
    "IrViolation",
    "LoweredSig",
    "Node",
    "Region",
    "Val",
    "Wire",
    "emit_ir_json",
    "emit_ir_text",
    "emit_program_text",
    "ir_to_json",
    "lower_function",
    "lower_program",
    "lower_signature",
    "verify_ir",
]
