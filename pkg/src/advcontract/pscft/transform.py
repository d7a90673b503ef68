"""Filtering, pruning and canonical renaming of lifted IR."""

from __future__ import annotations

import re
from dataclasses import replace

from advcontract.evm.ir import ContractIR, FunctionIR
from advcontract.pscft.model import KIND_OF_OP, PRIVATE, CallStatement

_PLACEHOLDER = re.compile(r"^(private_0x[0-9a-f]+|InternalFunction_\d+)$")


def to_call_statement(st) -> CallStatement | None:
    if isinstance(st, CallStatement):
        return st
    kind = KIND_OF_OP.get(st.op)
    if kind is None:
        return None
    return CallStatement(
        offset=st.offset,
        op=st.op,
        kind=kind,
        target_address=st.target_address,
        selector=st.selector,
        callee=st.callee,
    )


def filter_call_statements(ir: ContractIR) -> ContractIR:
    """Keep only call-related statements; graph topology is untouched."""
    funcs = []
    for fn in ir.functions:
        blocks = []
        for b in fn.blocks:
            kept = tuple(c for c in (to_call_statement(s) for s in b.statements) if c is not None)
            blocks.append(replace(b, statements=kept))
        funcs.append(replace(fn, blocks=tuple(blocks)))
    return replace(ir, functions=tuple(funcs))


def prune_cfg(fn: FunctionIR) -> FunctionIR:
    """Drop empty non-entry blocks, reconnecting every predecessor to every successor.

    A survivor ``p`` gets an edge to survivor ``s`` exactly when the original
    graph has a path from ``p`` to ``s`` whose interior blocks were all
    removed. This is what repeated single-block removal with full
    predecessor x successor reconnection converges to, independent of order.
    """
    keep = {b.id for b in fn.blocks if b.statements or b.id == fn.entry_block}
    succ = {b.id: b.successors for b in fn.blocks}
    new_succ: dict[int, set[int]] = {}
    for p in keep:
        out: set[int] = set()
        seen: set[int] = set()
        stack = list(succ[p])
        while stack:
            x = stack.pop()
            if x in keep:
                out.add(x)
            elif x not in seen:
                seen.add(x)
                stack.extend(succ.get(x, ()))
        new_succ[p] = out
    new_pred: dict[int, set[int]] = {p: set() for p in keep}
    for p, ss in new_succ.items():
        for s in ss:
            new_pred[s].add(p)
    blocks = tuple(
        replace(b, successors=frozenset(new_succ[b.id]), predecessors=frozenset(new_pred[b.id]))
        for b in fn.blocks
        if b.id in keep
    )
    return replace(fn, blocks=blocks)


def prune_contract(ir: ContractIR) -> ContractIR:
    return replace(ir, functions=tuple(prune_cfg(f) for f in ir.functions))


def _source_name(fn: FunctionIR) -> str:
    return fn.original_name if fn.original_name is not None else fn.canonical_name


def canonical_order(functions) -> list[FunctionIR]:
    """Public functions by name, then the fallback, then private functions.

    Private functions carrying only a placeholder name sort by entry offset.
    """
    pubs = sorted(
        (f for f in functions if f.visibility == "public"),
        key=lambda f: (_source_name(f), f.selector or b"", f.entry_block),
    )
    fbs = sorted((f for f in functions if f.visibility == "fallback"), key=lambda f: f.entry_block)

    def pkey(f):
        name = _source_name(f)
        return ("" if _PLACEHOLDER.match(name) else name, f.entry_block)

    privs = sorted((f for f in functions if f.visibility == "private"), key=pkey)
    return pubs + fbs + privs


def block_preorder(fn: FunctionIR) -> list[int]:
    """DFS preorder from the entry, children in ascending id; unreached blocks appended by id."""
    order: list[int] = []
    seen: set[int] = set()
    stack = [fn.entry_block]
    bm = fn.block_map
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        order.append(x)
        for s in sorted(bm[x].successors, reverse=True):
            if s not in seen:
                stack.append(s)
    order += sorted(b for b in bm if b not in seen)
    return order


def canonical_rename(ir: ContractIR) -> ContractIR:
    ordered = canonical_order(ir.functions)
    private_names: dict[int, str] = {}
    k = 0
    for f in ordered:
        if f.visibility == "private":
            private_names[f.entry_block] = f"InternalFunction_{k}"
            k += 1
    funcs = []
    for i, f in enumerate(ordered):
        names = {bid: f"BB_{i}_{j}" for j, bid in enumerate(block_preorder(f))}
        bm = f.block_map
        blocks = []
        for bid in block_preorder(f):
            b = bm[bid]
            stmts = tuple(_rename_stmt(s, private_names) for s in b.statements)
            blocks.append(replace(b, name=names[bid], statements=stmts))
        name = private_names.get(f.entry_block, f.canonical_name) if f.visibility == "private" else f.canonical_name
        funcs.append(replace(f, blocks=tuple(blocks), canonical_name=name, original_name=_source_name(f)))
    return replace(ir, functions=tuple(funcs))


def _rename_stmt(s, private_names):
    if isinstance(s, CallStatement) and s.kind == PRIVATE:
        return replace(s, callee_name=private_names.get(s.callee))
    return s


__all__ = [
    "block_preorder",
    "canonical_order",
    "canonical_rename",
    "filter_call_statements",
    "prune_cfg",
    "prune_contract",
    "to_call_statement",
]
