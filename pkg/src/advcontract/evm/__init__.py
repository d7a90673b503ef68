"""EVM bytecode lifting: disassembly, CFG recovery and function discovery."""

from advcontract.evm.cfg import ControlFlowGraph, build_cfg, identify_basic_blocks, resolve_jumps
from advcontract.evm.disasm import Instruction, assemble, disassemble, parse_bytecode
from advcontract.evm.external_ir import (
    ExternalIRError,
    ingest_external_ir,
    normalize_external_ir,
    serialize_external_ir,
)
from advcontract.evm.functions import count_opcode, discover_functions, lift
from advcontract.evm.ir import BasicBlock, ContractIR, FunctionIR, Statement, check_edge_symmetry
from advcontract.evm.runtime import split_creation_code

__all__ = [
    "BasicBlock",
    "ContractIR",
    "ControlFlowGraph",
    "ExternalIRError",
    "FunctionIR",
    "Instruction",
    "Statement",
    "assemble",
    "build_cfg",
    "check_edge_symmetry",
    "count_opcode",
    "disassemble",
    "discover_functions",
    "identify_basic_blocks",
    "ingest_external_ir",
    "lift",
    "normalize_external_ir",
    "parse_bytecode",
    "resolve_jumps",
    "serialize_external_ir",
    "split_creation_code",
]
