"""Semantic recovery: address labels and function names for call statements."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Callable, Mapping, Protocol

from advcontract.chain.snapshot import ReplayMissError
from advcontract.evm.ir import ContractIR
from advcontract.hashing import selector_of
from advcontract.labels import AddressLabelDB
from advcontract.pscft.model import EXTERNAL, CallStatement, identifier

log = logging.getLogger(__name__)


class SignatureResolver(Protocol):
    def resolve(self, selector: bytes) -> str | None: ...


class LabelProvider(Protocol):
    def label_for(self, address: bytes) -> str | None: ...


class ChainedResolver:
    """Try resolvers in order; the first consistent hit wins."""

    def __init__(self, *resolvers: SignatureResolver):
        self.resolvers = resolvers

    def resolve(self, selector: bytes) -> str | None:
        for r in self.resolvers:
            sig = r.resolve(selector)
            if sig and selector_of(sig) == selector:
                return sig
        return None


class DBLabelProvider:
    """Label database first, then the verified contract name, if a lookup is given."""

    def __init__(
        self,
        labels: AddressLabelDB | None = None,
        contract_names: Mapping[str, str] | Callable[[bytes], str | None] | None = None,
    ):
        self.labels = labels or AddressLabelDB()
        self.contract_names = contract_names

    def label_for(self, address: bytes) -> str | None:
        hit = self.labels.lookup(address)
        if hit is not None:
            return hit[0]
        if self.contract_names is None:
            return None
        if callable(self.contract_names):
            return self.contract_names(address)
        return self.contract_names.get("0x" + address.hex())


def _safe_resolve(resolver, selector: bytes, diags: list[str]) -> str | None:
    if resolver is None:
        return None
    try:
        sig = resolver.resolve(selector)
    except ReplayMissError:
        raise
    except Exception as exc:  # resolver trouble never aborts recovery
        diags.append(f"selector resolver failed for 0x{selector.hex()}: {exc}")
        return None
    if sig and selector_of(sig) != selector:
        diags.append(f"rejected signature {sig!r} for selector 0x{selector.hex()}")
        return None
    return sig


def _safe_label(provider, address: bytes, diags: list[str]) -> str | None:
    if provider is None:
        return None
    try:
        lab = provider.label_for(address)
    except ReplayMissError:
        raise
    except Exception as exc:
        diags.append(f"label lookup failed for 0x{address.hex()}: {exc}")
        return None
    return identifier(lab) if lab else None


def recover_semantics(
    ir: ContractIR,
    sig_resolver: SignatureResolver | None = None,
    label_provider: LabelProvider | None = None,
) -> ContractIR:
    """Attach target labels and resolved signatures to external calls.

    Public functions still carrying a selector placeholder are named here as
    well, keeping the order fixed by canonical renaming.
    """
    diags: list[str] = []
    memo_sig: dict[bytes, str | None] = {}
    memo_lab: dict[bytes, str | None] = {}

    def sig_for(sel: bytes) -> str | None:
        if sel not in memo_sig:
            memo_sig[sel] = _safe_resolve(sig_resolver, sel, diags)
        return memo_sig[sel]

    def label_for(addr: bytes) -> str | None:
        if addr not in memo_lab:
            memo_lab[addr] = _safe_label(label_provider, addr, diags)
        return memo_lab[addr]

    funcs = []
    for fn in ir.functions:
        if fn.visibility == "public" and fn.signature is None:
            sig = sig_for(fn.selector)
            if sig:
                fn = replace(fn, signature=sig, canonical_name=sig.split("(", 1)[0])
        blocks = []
        for b in fn.blocks:
            stmts = []
            for s in b.statements:
                if isinstance(s, CallStatement) and s.kind == EXTERNAL:
                    lab = label_for(s.target_address) if s.target_address else None
                    sig = sig_for(s.selector) if s.selector else None
                    s = replace(s, target_label=lab, resolved_signature=sig)
                stmts.append(s)
            blocks.append(replace(b, statements=tuple(stmts)))
        funcs.append(replace(fn, blocks=tuple(blocks)))
    return replace(ir, functions=tuple(funcs), diagnostics=tuple(ir.diagnostics) + tuple(diags))
