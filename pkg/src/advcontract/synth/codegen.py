"""Render contract blueprints to solc-style EVM bytecode.

The layout mirrors what the Solidity compiler emits closely enough for the
lifter's dispatcher and call/return recognition: a selector dispatcher of
``DUP1 PUSH4 sel EQ PUSH2 tag JUMPI`` blocks, public bodies ending in STOP,
and shared internal helpers entered with a pushed return address.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from advcontract.evm.asm import assemble_text
from advcontract.pscft.standards import ERC1967_SLOT


@dataclass(frozen=True)
class Call:
    opcode: str = "CALL"  # CALL | STATICCALL | DELEGATECALL | CALLCODE
    target: bytes | None = None  # None: address loaded from storage
    selector: bytes | None = None  # None: raw call without calldata selector


@dataclass(frozen=True)
class PrivateCall:
    helper: int


@dataclass(frozen=True)
class Branch:
    body: tuple = ()


@dataclass(frozen=True)
class Create:
    opcode: str = "CREATE"


@dataclass(frozen=True)
class Filler:
    n: int = 1


@dataclass
class FunctionSpec:
    selector: bytes
    steps: list = field(default_factory=list)
    selfdestruct: bool = False


@dataclass
class ContractBlueprint:
    functions: list[FunctionSpec] = field(default_factory=list)
    helpers: list[list] = field(default_factory=list)
    fallback: str = "revert"  # revert | stop | delegate
    delegate_target: bytes | None = None
    constructor_filler: int = 0


class _Emitter:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.n = 0

    def fresh(self, stem: str) -> str:
        self.n += 1
        return f"{stem}_{self.n}"

    def emit(self, *items: str) -> None:
        self.lines.extend(items)

    def steps(self, steps) -> None:
        for st in steps:
            self.step(st)

    def step(self, st) -> None:
        if isinstance(st, Call):
            self.call(st)
        elif isinstance(st, PrivateCall):
            ret = self.fresh("ret")
            self.emit(f"PUSH2 @{ret}", f"PUSH2 @helper_{st.helper}", "JUMP", f"{ret}:")
        elif isinstance(st, Branch):
            skip = self.fresh("skip")
            self.emit("PUSH1 0x04", "CALLDATALOAD", "ISZERO", f"PUSH2 @{skip}", "JUMPI")
            self.steps(st.body)
            self.emit(f"{skip}:")
        elif isinstance(st, Create):
            self.emit("PUSH1 0x00", "PUSH1 0x00", "PUSH1 0x00")
            if st.opcode == "CREATE2":
                self.emit("PUSH1 0x00")
            self.emit(st.opcode, "POP")
        elif isinstance(st, Filler):
            for i in range(st.n):
                self.emit(f"PUSH1 0x{(i * 7 + 1) & 0xFF:02x}", "PUSH1 0x01", "SLOAD", "ADD", f"PUSH1 0x{i & 0x1F:02x}", "SSTORE")
        else:
            raise TypeError(f"unknown step {st!r}")

    def call(self, c: Call) -> None:
        if c.selector is not None:
            self.emit(f"PUSH4 0x{c.selector.hex()}", "PUSH1 0xe0", "SHL", "PUSH1 0x80", "MSTORE")
        self.emit("PUSH1 0x20", "PUSH1 0x00", "PUSH1 0x44", "PUSH1 0x80")
        if c.opcode in ("CALL", "CALLCODE"):
            self.emit("PUSH1 0x00")
        if c.target is not None:
            self.emit(f"PUSH20 0x{c.target.hex()}")
        else:
            self.emit("PUSH1 0x00", "SLOAD")
        self.emit("GAS", c.opcode, "POP")


def runtime_source(bp: ContractBlueprint) -> str:
    e = _Emitter()
    e.emit("PUSH1 0x80", "PUSH1 0x40", "MSTORE")
    if bp.functions:
        e.emit("PUSH1 0x04", "CALLDATASIZE", "LT", "PUSH2 @fallback", "JUMPI")
        e.emit("PUSH1 0x00", "CALLDATALOAD", "PUSH1 0xe0", "SHR")
        for i, fn in enumerate(bp.functions):
            e.emit("DUP1", f"PUSH4 0x{fn.selector.hex()}", "EQ", f"PUSH2 @pub_{i}", "JUMPI")
    e.emit("fallback:")
    if bp.fallback == "delegate":
        target = f"PUSH20 0x{bp.delegate_target.hex()}" if bp.delegate_target else f"PUSH32 0x{ERC1967_SLOT:064x}|SLOAD"
        e.emit("CALLDATASIZE", "PUSH1 0x00", "DUP1", "CALLDATACOPY")
        e.emit("PUSH1 0x00", "DUP1", "CALLDATASIZE", "PUSH1 0x00", *target.split("|"), "GAS", "DELEGATECALL")
        e.emit("RETURNDATASIZE", "PUSH1 0x00", "DUP1", "RETURNDATACOPY", "RETURNDATASIZE", "PUSH1 0x00", "RETURN")
    elif bp.fallback == "stop":
        e.emit("STOP")
    else:
        e.emit("PUSH1 0x00", "DUP1", "REVERT")
    for i, fn in enumerate(bp.functions):
        e.emit(f"pub_{i}:")
        e.steps(fn.steps)
        if fn.selfdestruct:
            e.emit("CALLER", "SELFDESTRUCT")
        else:
            e.emit("STOP")
    for k, helper in enumerate(bp.helpers):
        e.emit(f"helper_{k}:")
        e.steps(helper)
        e.emit("JUMP")
    return "\n".join(e.lines)


def render_runtime(bp: ContractBlueprint) -> bytes:
    return assemble_text(runtime_source(bp))


def render_creation(bp: ContractBlueprint, runtime: bytes | None = None) -> bytes:
    """Creation input: constructor that CODECOPYs and RETURNs the runtime code."""
    runtime = render_runtime(bp) if runtime is None else runtime
    filler = []
    for i in range(bp.constructor_filler):
        filler += [f"PUSH1 0x{i & 0xFF:02x}", f"PUSH1 0x{i & 0x1F:02x}", "SSTORE"]
    # offsets are fixed-width, so assemble once to learn the prefix length
    def prefix(off: int) -> bytes:
        return assemble_text(
            "\n".join(
                [
                    "PUSH1 0x80",
                    "PUSH1 0x40",
                    "MSTORE",
                    *filler,
                    f"PUSH2 0x{len(runtime):04x}",
                    "DUP1",
                    f"PUSH2 0x{off:04x}",
                    "PUSH1 0x00",
                    "CODECOPY",
                    "PUSH1 0x00",
                    "RETURN",
                    "INVALID",
                ]
            )
        )

    head = prefix(0)
    return prefix(len(head)) + runtime
