"""Contract-level intermediate representation produced by the lifter.

All values are immutable; transformations build new objects with
``dataclasses.replace``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping


@dataclass(frozen=True)
class Statement:
    """One lifted statement.

    ``op`` is an opcode name, or ``CALLPRIVATE`` for a call into a private
    function (``callee`` holds that function's entry block id). Call-family
    statements carry whatever constant target address and 4-byte selector
    the lifter could see reaching them.
    """

    offset: int
    op: str
    operand: int | None = None
    target_address: bytes | None = None
    selector: bytes | None = None
    callee: int | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"offset": self.offset, "op": self.op}
        if self.operand is not None:
            d["operand"] = hex(self.operand)
        if self.target_address is not None:
            d["target_address"] = "0x" + self.target_address.hex()
        if self.selector is not None:
            d["selector"] = "0x" + self.selector.hex()
        if self.callee is not None:
            d["callee"] = self.callee
        return d


@dataclass(frozen=True)
class BasicBlock:
    id: int
    statements: tuple = ()
    predecessors: frozenset[int] = frozenset()
    successors: frozenset[int] = frozenset()
    name: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d = {
            "id": self.id,
            "preds": sorted(self.predecessors),
            "succs": sorted(self.successors),
            "statements": [s.to_dict() for s in self.statements],
        }
        if self.name is not None:
            d["name"] = self.name
        return d


@dataclass(frozen=True)
class FunctionIR:
    entry_block: int
    visibility: str  # public | private | fallback
    canonical_name: str
    blocks: tuple[BasicBlock, ...]
    selector: bytes | None = None
    signature: str | None = None
    # name before canonical renaming, kept so renaming stays idempotent
    original_name: str | None = None

    def __post_init__(self) -> None:
        if self.visibility not in ("public", "private", "fallback"):
            raise ValueError(f"bad visibility {self.visibility!r}")
        if self.visibility == "public" and self.selector is None:
            raise ValueError("public function without selector")
        if self.visibility == "private" and self.selector is not None:
            raise ValueError("private function with selector")

    @cached_property
    def block_map(self) -> dict[int, BasicBlock]:
        return {b.id: b for b in self.blocks}

    def block(self, bid: int) -> BasicBlock:
        return self.block_map[bid]

    def to_dict(self) -> dict[str, Any]:
        return {
            "entry": self.entry_block,
            "visibility": self.visibility,
            "name": self.canonical_name,
            "selector": "0x" + self.selector.hex() if self.selector else None,
            "signature": self.signature,
            "original_name": self.original_name,
            "blocks": [b.to_dict() for b in self.blocks],
        }


@dataclass(frozen=True)
class ContractIR:
    functions: tuple[FunctionIR, ...]
    runtime_bytecode: bytes = b""
    address: bytes | None = None
    opcode_counts: Mapping[str, int] = field(default_factory=dict)
    diagnostics: tuple[str, ...] = ()

    @cached_property
    def function_by_entry(self) -> dict[int, FunctionIR]:
        return {f.entry_block: f for f in self.functions}

    def all_blocks(self) -> Iterable[BasicBlock]:
        for f in self.functions:
            yield from f.blocks

    def public_functions(self) -> list[FunctionIR]:
        return [f for f in self.functions if f.visibility == "public"]

    def to_dict(self) -> dict[str, Any]:
        return {
            "address": "0x" + self.address.hex() if self.address else None,
            "runtime_bytecode": self.runtime_bytecode.hex(),
            "opcode_counts": dict(sorted(self.opcode_counts.items())),
            "functions": [f.to_dict() for f in self.functions],
            "diagnostics": list(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def check_edge_symmetry(blocks: Iterable[BasicBlock]) -> list[str]:
    """Return a list of symmetry violations (empty when consistent)."""
    bm = {b.id: b for b in blocks}
    problems = []
    for b in bm.values():
        for s in b.successors:
            if s not in bm or b.id not in bm[s].predecessors:
                problems.append(f"{b.id}->{s} missing reverse predecessor")
        for p in b.predecessors:
            if p not in bm or b.id not in bm[p].successors:
                problems.append(f"{p}->{b.id} missing forward successor")
    return problems
