"""Pruned semantic call/control-flow text (PSCFT) construction."""

from __future__ import annotations

from advcontract.evm.ir import ContractIR
from advcontract.pscft.model import CallStatement, PSCFTDocument
from advcontract.pscft.semantics import ChainedResolver, DBLabelProvider, recover_semantics
from advcontract.pscft.serialize import (
    PSCFTFunction,
    pscft_graph,
    read_pscft,
    serialize_pscft,
    tokenize,
    write_pscft,
)
from advcontract.pscft.standards import detect_standard_contract, is_token_or_proxy
from advcontract.pscft.transform import (
    block_preorder,
    canonical_rename,
    filter_call_statements,
    prune_cfg,
    prune_contract,
)


def annotate(ir: ContractIR, sig_resolver=None, label_provider=None) -> ContractIR:
    """filter -> prune -> rename -> recover semantics."""
    ir = prune_contract(filter_call_statements(ir))
    return recover_semantics(canonical_rename(ir), sig_resolver, label_provider)


def build_pscft(ir: ContractIR, sig_resolver=None, label_provider=None) -> tuple[ContractIR, PSCFTDocument]:
    annotated = annotate(ir, sig_resolver, label_provider)
    return annotated, serialize_pscft(annotated)


__all__ = [
    "CallStatement",
    "ChainedResolver",
    "DBLabelProvider",
    "PSCFTDocument",
    "PSCFTFunction",
    "annotate",
    "block_preorder",
    "build_pscft",
    "canonical_rename",
    "detect_standard_contract",
    "filter_call_statements",
    "is_token_or_proxy",
    "prune_cfg",
    "prune_contract",
    "pscft_graph",
    "read_pscft",
    "recover_semantics",
    "serialize_pscft",
    "tokenize",
    "write_pscft",
]
