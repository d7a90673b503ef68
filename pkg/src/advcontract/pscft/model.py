from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from advcontract.hashing import selector_of

EXTERNAL = "external-call"
PRIVATE = "private-call"
CREATE = "create"
SELFDESTRUCT = "selfdestruct"

KIND_OF_OP = {
    "CALL": EXTERNAL,
    "STATICCALL": EXTERNAL,
    "DELEGATECALL": EXTERNAL,
    "CALLCODE": EXTERNAL,
    "CALLPRIVATE": PRIVATE,
    "CREATE": CREATE,
    "CREATE2": CREATE,
    "SELFDESTRUCT": SELFDESTRUCT,
}

UNKNOWN_TARGET = "UnknownTarget"
UNKNOWN_FUNC = "UnknownFunc"
RAW_CALL = "RawCall"

_IDENT_BAD = re.compile(r"[^A-Za-z0-9_$]")


def identifier(text: str) -> str:
    """Squash a free-form label into a single PSCFT name token."""
    return _IDENT_BAD.sub("", text)


@dataclass(frozen=True)
class CallStatement:
    """A call-related statement kept by the PSCFT filter.

    ``selector is None`` on an external call means a raw call: no 4-byte
    calldata constant was seen reaching it.
    """

    offset: int
    op: str
    kind: str
    target_address: bytes | None = None
    selector: bytes | None = None
    callee: int | None = None
    callee_name: str | None = None
    resolved_signature: str | None = None
    target_label: str | None = None

    def __post_init__(self) -> None:
        if self.kind != KIND_OF_OP.get(self.op):
            raise ValueError(f"{self.op} is not a {self.kind} statement")
        if self.resolved_signature is not None:
            if self.selector is None or selector_of(self.resolved_signature) != self.selector:
                raise ValueError(f"signature {self.resolved_signature!r} does not hash to the selector")

    @property
    def raw(self) -> bool:
        return self.kind == EXTERNAL and self.selector is None

    @property
    def func_name(self) -> str:
        if self.raw:
            return RAW_CALL
        if self.resolved_signature:
            return self.resolved_signature.split("(", 1)[0]
        return UNKNOWN_FUNC

    def render(self) -> str:
        if self.kind == PRIVATE:
            return f"{self.callee_name or 'UnknownInternal'}(...args)"
        if self.kind in (CREATE, SELFDESTRUCT):
            return f"{self.op.lower()}(...args)"
        label = self.target_label or UNKNOWN_TARGET
        prefix = "" if self.op == "CALL" else self.op.lower() + " "
        return f"{prefix}{label}.{self.func_name}(...args)"

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"offset": self.offset, "op": self.op, "kind": self.kind}
        if self.target_address is not None:
            d["target_address"] = "0x" + self.target_address.hex()
        if self.selector is not None:
            d["selector"] = "0x" + self.selector.hex()
        if self.callee is not None:
            d["callee"] = self.callee
        if self.callee_name is not None:
            d["callee_name"] = self.callee_name
        if self.resolved_signature is not None:
            d["resolved_signature"] = self.resolved_signature
        if self.target_label is not None:
            d["target_label"] = self.target_label
        return d


@dataclass(frozen=True)
class PSCFTDocument:
    contract_id: str
    text: str
    token_stream: tuple[str, ...]

    @property
    def function_count(self) -> int:
        return sum(1 for ln in self.text.splitlines() if ln.startswith("function "))
