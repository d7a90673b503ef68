"""Function discovery over a resolved CFG, and the top-level ``lift`` entry point."""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Mapping

from advcontract.evm.cfg import ControlFlowGraph, build_cfg
from advcontract.evm.disasm import disassemble, parse_bytecode
from advcontract.evm.ir import BasicBlock, ContractIR, FunctionIR, Statement
from advcontract.evm.opcodes import EXTERNAL_CALLS

FALLBACK_NAME = "fallback"


def selector_placeholder(selector: bytes) -> str:
    return "0x" + selector.hex()


def _dispatch_match(block: BasicBlock) -> tuple[bytes, int] | None:
    """Match ``PUSH4 sel; [DUP/SWAP]*; EQ; PUSHn target; JUMPI`` at a block tail."""
    ins = block.statements
    if len(ins) < 4 or ins[-1].name != "JUMPI":
        return None
    tgt = ins[-2]
    if tgt.push_operand is None or ins[-3].name != "EQ":
        return None
    i = len(ins) - 4
    # the selector constant may sit on either side of EQ, after a DUP/SWAP
    for _ in range(3):
        if i < 0:
            return None
        cand = ins[i]
        if cand.push_operand is not None and 1 <= len(cand.push_operand) <= 4:
            return cand.value.to_bytes(4, "big"), tgt.value
        if not (cand.name.startswith("DUP") or cand.name.startswith("SWAP")):
            return None
        i -= 1
    return None


def _find_dispatch(cfg: ControlFlowGraph) -> dict[int, bytes]:
    """Public entry -> selector, found by walking the dispatcher region from the entry block."""
    if cfg.entry is None:
        return {}
    publics: dict[int, bytes] = {}
    seen_sel: set[bytes] = set()
    seen = {cfg.entry}
    stack = [cfg.entry]
    while stack:
        bid = stack.pop()
        m = _dispatch_match(cfg.blocks[bid])
        stop = None
        if m is not None:
            sel, target = m
            if target in cfg.blocks and target != cfg.entry and target in cfg.succs.get(bid, ()):
                if sel not in seen_sel and target not in publics:
                    publics[target] = sel
                    seen_sel.add(sel)
                stop = target
        for s in sorted(cfg.succs.get(bid, ()), reverse=True):
            if s != stop and s not in seen and s not in publics:
                seen.add(s)
                stack.append(s)
    return publics


def _call_sites(cfg: ControlFlowGraph) -> dict[int, tuple[int, int, int]]:
    """block -> (callee entry, return block, push offset) for confirmed call/return pairs."""
    returns_by_origin: dict[int, set[int]] = defaultdict(set)
    for (src, dst), origins in cfg.jump_origins.items():
        for o in origins:
            returns_by_origin[o].add(dst)
    sites = {}
    for bid in sorted(cfg.pushed_returns):
        targets = [t for t in cfg.succs.get(bid, ()) if (bid, t) in cfg.jump_origins]
        if len(targets) != 1:
            continue
        for ret, origin in sorted(cfg.pushed_returns[bid]):
            if ret in returns_by_origin.get(origin, ()):
                sites[bid] = (targets[0], ret, origin)
                break
    return sites


def discover_functions(
    cfg: ControlFlowGraph,
    signatures: Mapping[bytes, str] | None = None,
) -> list[FunctionIR]:
    """Partition reachable blocks into public, private and fallback functions.

    Private functions are call targets entered from at least two distinct
    call sites. Each block belongs to the lowest-offset function entry that
    reaches it without crossing another entry.
    """
    if cfg.entry is None:
        return []
    signatures = signatures or {}
    publics = _find_dispatch(cfg)
    sites = _call_sites(cfg)

    callers: dict[int, set[int]] = defaultdict(set)
    for b, (t, _r, _o) in sites.items():
        callers[t].add(b)
    privates = {t for t, bs in callers.items() if len(bs) >= 2 and t not in publics and t != cfg.entry}
    private_sites = {b: v for b, v in sites.items() if v[0] in privates}
    private_origins = {v[2] for v in private_sites.values()}

    # intra-procedural edge set: drop call and return edges of private calls, add call -> continuation
    edges: dict[int, set[int]] = defaultdict(set)
    for a, ss in cfg.succs.items():
        for b in ss:
            if a in private_sites and b == private_sites[a][0]:
                continue
            origins = cfg.jump_origins.get((a, b))
            if origins and origins <= private_origins:
                continue
            edges[a].add(b)
    for b, (_t, r, _o) in private_sites.items():
        edges[b].add(r)

    roots = sorted({cfg.entry, *publics, *privates})
    root_set = set(roots)
    owner: dict[int, int] = {}
    for r in roots:  # ascending, so ties go to the lowest entry offset
        seen = {r}
        stack = [r]
        while stack:
            x = stack.pop()
            for s in edges.get(x, ()):
                if s not in seen and s not in root_set:
                    seen.add(s)
                    stack.append(s)
        for x in seen:
            owner.setdefault(x, r)

    members: dict[int, list[int]] = defaultdict(list)
    for bid in sorted(owner):
        members[owner[bid]].append(bid)

    redges: dict[int, set[int]] = defaultdict(set)
    for a, ss in edges.items():
        for b in ss:
            redges[b].add(a)

    call_ann = _call_annotations(cfg)
    functions = []
    for r in roots:
        ids = members[r]
        idset = set(ids)
        blocks = []
        for bid in ids:
            succs = frozenset(s for s in edges.get(bid, ()) if s in idset)
            preds = frozenset(p for p in redges.get(bid, ()) if p in idset)
            stmts = [_statement(ins, call_ann) for ins in cfg.blocks[bid].statements]
            if bid in private_sites:
                jump = cfg.blocks[bid].statements[-1]
                stmts.append(Statement(jump.offset, "CALLPRIVATE", callee=private_sites[bid][0]))
            blocks.append(BasicBlock(bid, tuple(stmts), preds, succs))
        if r in publics:
            sel = publics[r]
            sig = signatures.get(sel)
            name = sig.split("(", 1)[0] if sig else selector_placeholder(sel)
            functions.append(FunctionIR(r, "public", name, tuple(blocks), selector=sel, signature=sig))
        elif r in privates:
            functions.append(FunctionIR(r, "private", f"private_0x{r:x}", tuple(blocks)))
        else:
            functions.append(FunctionIR(r, "fallback", FALLBACK_NAME, tuple(blocks)))
    return functions


def _call_annotations(cfg: ControlFlowGraph) -> dict[int, tuple[bytes | None, bytes | None]]:
    out = {}
    for off, arglists in cfg.observed_args.items():
        addrs = {a[1] if len(a) > 1 else None for a in arglists}
        addr = None
        if len(addrs) == 1:
            (v,) = addrs
            if v is not None and 0 < v < (1 << 160):
                addr = v.to_bytes(20, "big")
        sels = cfg.pending_selectors.get(off, set())
        sel = None
        if len(sels) == 1:
            (sv,) = sels
            if sv is not None:
                sel = sv.to_bytes(4, "big")
        out[off] = (addr, sel)
    return out


def _statement(ins, call_ann) -> Statement:
    if ins.name in EXTERNAL_CALLS:
        addr, sel = call_ann.get(ins.offset, (None, None))
        return Statement(ins.offset, ins.name, target_address=addr, selector=sel)
    return Statement(ins.offset, ins.name, operand=ins.value if ins.push_operand is not None else None)


def count_opcodes(instrs) -> dict[str, int]:
    return dict(Counter(ins.name for ins in instrs))


def count_opcode(ir: ContractIR, opcode: str) -> int:
    """Static occurrence count of ``opcode`` in the runtime bytecode."""
    return ir.opcode_counts.get(opcode.upper(), 0)


def lift(
    bytecode: bytes | str,
    address: bytes | None = None,
    signatures: Mapping[bytes, str] | None = None,
) -> ContractIR:
    """Disassemble, build the CFG and discover functions for runtime bytecode."""
    code = parse_bytecode(bytecode)
    instrs = disassemble(code)
    cfg = build_cfg(instrs)
    functions = discover_functions(cfg, signatures)
    return ContractIR(
        functions=tuple(functions),
        runtime_bytecode=code,
        address=address,
        opcode_counts=count_opcodes(instrs),
        diagnostics=tuple(cfg.diagnostics),
    )
