"""Basic-block recovery and constant-jump resolution.

Jump targets are resolved with a small abstract stack interpreter. A stack
slot is either unknown or a known constant; a constant only resolves a jump
when it came straight from a PUSH and has travelled through DUP/SWAP alone
(no arithmetic on that slot). The interpreter runs per block with the
entry stacks seen along resolved edges, so return addresses pushed by a
caller resolve the callee's return jump in that caller's context.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

from advcontract.evm.disasm import Instruction
from advcontract.evm.ir import BasicBlock
from advcontract.evm.opcodes import EXTERNAL_CALLS, TERMINATORS, stack_effect

log = logging.getLogger(__name__)

MAX_CONTEXTS_PER_BLOCK = 128
MAX_BLOCK_VISITS = 200_000
MAX_STACK = 1024
# entry stacks are cut to their top slots so recursion reaches a fixed point
CONTEXT_DEPTH = 48
_WORD = (1 << 256) - 1
_LOW224 = (1 << 224) - 1

# abstract value: (constant or None, offset of the originating PUSH or None)
_UNKNOWN = (None, None)


def identify_basic_blocks(instrs: list[Instruction]) -> list[BasicBlock]:
    """Split a linear disassembly into basic blocks keyed by entry offset."""
    blocks: list[BasicBlock] = []
    current: list[Instruction] = []
    for ins in instrs:
        if ins.name == "JUMPDEST" and current:
            blocks.append(BasicBlock(current[0].offset, tuple(current)))
            current = []
        current.append(ins)
        if ins.name in TERMINATORS:
            blocks.append(BasicBlock(current[0].offset, tuple(current)))
            current = []
    if current:
        blocks.append(BasicBlock(current[0].offset, tuple(current)))
    return blocks


@dataclass
class CallSite:
    """A resolved JUMP that pushed its own return address."""

    block: int
    target: int
    return_to: int
    push_offset: int


@dataclass
class ControlFlowGraph:
    blocks: dict[int, BasicBlock]
    order: list[int]
    succs: dict[int, set[int]] = field(default_factory=lambda: defaultdict(set))
    preds: dict[int, set[int]] = field(default_factory=lambda: defaultdict(set))
    # (src, dst) -> offsets of the PUSH instructions that produced the target
    jump_origins: dict[tuple[int, int], set[int]] = field(default_factory=lambda: defaultdict(set))
    # block id -> {(return value, push offset)} candidates seen at its final JUMP
    pushed_returns: dict[int, set[tuple[int, int]]] = field(default_factory=lambda: defaultdict(set))
    # instruction offset -> list of observed argument tuples (watched ops only)
    observed_args: dict[int, list[tuple]] = field(default_factory=lambda: defaultdict(list))
    # instruction offset -> selectors pending in memory when a call executed
    pending_selectors: dict[int, set] = field(default_factory=lambda: defaultdict(set))
    unresolved: set[int] = field(default_factory=set)
    reached: set[int] = field(default_factory=set)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def entry(self) -> int | None:
        return self.order[0] if self.order else None

    def add_edge(self, a: int, b: int) -> None:
        self.succs[a].add(b)
        self.preds[b].add(a)

    def edges(self) -> set[tuple[int, int]]:
        return {(a, b) for a, ss in self.succs.items() for b in ss}

    def next_block(self, bid: int) -> int | None:
        i = self._index[bid] + 1
        return self.order[i] if i < len(self.order) else None

    def __post_init__(self) -> None:
        self._index = {b: i for i, b in enumerate(self.order)}

    def with_edges(self) -> list[BasicBlock]:
        """Blocks in offset order with predecessor/successor sets filled in."""
        return [
            BasicBlock(
                bid,
                self.blocks[bid].statements,
                frozenset(self.preds.get(bid, ())),
                frozenset(self.succs.get(bid, ())),
            )
            for bid in self.order
        ]

    def reachable_from(self, start: int) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            b = stack.pop()
            for s in self.succs.get(b, ()):
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return seen


def _fold(name: str, a: int, b: int) -> int | None:
    # a is the top of stack (first operand), b the second
    if name == "ADD":
        return (a + b) & _WORD
    if name == "SUB":
        return (a - b) & _WORD
    if name == "MUL":
        return (a * b) & _WORD
    if name == "AND":
        return a & b
    if name == "OR":
        return a | b
    if name == "XOR":
        return a ^ b
    if name == "SHL":
        return (b << a) & _WORD if a < 256 else 0
    if name == "SHR":
        return b >> a if a < 256 else 0
    if name == "DIV":
        return a // b if b else 0
    if name == "EXP":
        return pow(a, b, 1 << 256)
    if name == "EQ":
        return int(a == b)
    if name == "LT":
        return int(a < b)
    if name == "GT":
        return int(a > b)
    return None


_FOLDABLE = frozenset({"ADD", "SUB", "MUL", "AND", "OR", "XOR", "SHL", "SHR", "DIV", "EXP", "EQ", "LT", "GT"})
_WATCH = EXTERNAL_CALLS | {"CODECOPY", "CREATE", "CREATE2", "SELFDESTRUCT"}


def _run_block(block: BasicBlock, stack: tuple, pending, cfg: ControlFlowGraph):
    """Interpret one block; returns (exit stack, pending selector, jump target value)."""
    st = list(stack)
    target = None
    for ins in block.statements:
        name = ins.name
        op = ins.opcode
        if 0x5F <= op <= 0x7F:
            st.append((ins.value, ins.offset))
        elif 0x80 <= op <= 0x8F:
            n = op - 0x7F
            st.append(st[-n] if len(st) >= n else _UNKNOWN)
        elif 0x90 <= op <= 0x9F:
            n = op - 0x8F
            if len(st) > n:
                st[-1], st[-1 - n] = st[-1 - n], st[-1]
            else:
                st = [_UNKNOWN] * (n + 1 - len(st)) + st
                st[-1], st[-1 - n] = st[-1 - n], st[-1]
        elif name in ("JUMP", "JUMPI"):
            target = st[-1] if st else _UNKNOWN
            del st[-(2 if name == "JUMPI" else 1):]
        else:
            pops, pushes = stack_effect(op)
            args = [st[-1 - i] if i < len(st) else _UNKNOWN for i in range(pops)]
            if pops:
                del st[-pops:]
            if name in _WATCH:
                cfg.observed_args[ins.offset].append(tuple(a[0] for a in args))
                if name in EXTERNAL_CALLS:
                    cfg.pending_selectors[ins.offset].add(pending)
                    pending = None
            if name == "MSTORE":
                val = args[1][0]
                if val is not None and val >> 224 and not (val & _LOW224):
                    pending = val >> 224
            if pushes:
                if name in _FOLDABLE and args[0][0] is not None and args[1][0] is not None:
                    st.append((_fold(name, args[0][0], args[1][0]), None))
                elif name == "NOT" and args[0][0] is not None:
                    st.append((~args[0][0] & _WORD, None))
                else:
                    st.append(_UNKNOWN)
        if len(st) > MAX_STACK:
            st = st[-MAX_STACK:]
    return tuple(st), pending, target


def resolve_jumps(blocks: list[BasicBlock]) -> ControlFlowGraph:
    """Add fallthrough and constant-jump edges.

    Unresolvable jumps add no edge and leave a diagnostic; so does a
    constant target that is not a JUMPDEST.
    """
    bmap = {b.id: b for b in blocks}
    order = [b.id for b in blocks]
    cfg = ControlFlowGraph(bmap, order)
    jumpdests = {b.id for b in blocks if b.statements and b.statements[0].name == "JUMPDEST"}

    def last_name(b: BasicBlock) -> str:
        return b.statements[-1].name if b.statements else ""

    # structural edges first: fallthrough of non-terminated blocks and JUMPI false branches
    for bid in order:
        nm = last_name(bmap[bid])
        nxt = cfg.next_block(bid)
        if nxt is not None and (nm == "JUMPI" or nm not in TERMINATORS):
            cfg.add_edge(bid, nxt)

    contexts: dict[int, set] = defaultdict(set)
    unresolved_ctx: set[int] = set()
    bad_targets: dict[int, set[int]] = defaultdict(set)
    capped: set[int] = set()
    work: list[tuple[int, tuple, object]] = []

    def enqueue(bid: int, stack: tuple, pending) -> None:
        stack = stack[-CONTEXT_DEPTH:]
        key = (stack, pending)
        ctxs = contexts[bid]
        if key in ctxs:
            return
        if len(ctxs) >= MAX_CONTEXTS_PER_BLOCK:
            capped.add(bid)
            return
        ctxs.add(key)
        work.append((bid, stack, pending))

    def visit(bid: int, stack: tuple, pending, propagate: bool = True) -> None:
        if not propagate:
            enq = lambda *a: None  # noqa: E731
        else:
            enq = enqueue
        block = bmap[bid]
        out, pend, target = _run_block(block, stack, pending, cfg)
        nm = last_name(block)
        nxt = cfg.next_block(bid)
        if nm in ("JUMP", "JUMPI"):
            tval, origin = target
            if tval is None or origin is None:
                unresolved_ctx.add(bid)
            elif tval not in jumpdests:
                bad_targets[bid].add(tval)
            else:
                cfg.add_edge(bid, tval)
                cfg.jump_origins[(bid, tval)].add(origin)
                enq(tval, out, pend)
                if nm == "JUMP":
                    lo, hi = block.statements[0].offset, block.statements[-1].offset
                    for val, org in out:
                        if val is not None and org is not None and lo <= org <= hi and val in jumpdests and val != tval:
                            cfg.pushed_returns[bid].add((val, org))
            if nm == "JUMPI" and nxt is not None:
                enq(nxt, out, pend)
        elif nm not in TERMINATORS and nxt is not None:
            enq(nxt, out, pend)

    if order:
        enqueue(order[0], (), None)
    visits = 0
    while work:
        visits += 1
        if visits > MAX_BLOCK_VISITS:
            cfg.diagnostics.append("abstract interpretation budget exhausted")
            break
        visit(*work.pop())
    cfg.reached = set(contexts)

    # blocks the interpreter never reached: resolve intra-block constants only
    for bid in order:
        if bid not in cfg.reached and last_name(bmap[bid]) in ("JUMP", "JUMPI"):
            visit(bid, (), None, propagate=False)

    for bid in order:
        if bid in unresolved_ctx:
            cfg.unresolved.add(bid)
            cfg.diagnostics.append(f"unresolved jump at block 0x{bid:x}")
        for t in sorted(bad_targets.get(bid, ())):
            cfg.diagnostics.append(f"jump target 0x{t:x} from block 0x{bid:x} is not a JUMPDEST")
        if bid in capped:
            cfg.diagnostics.append(f"context limit reached at block 0x{bid:x}")
    return cfg


def build_cfg(instrs: list[Instruction]) -> ControlFlowGraph:
    return resolve_jumps(identify_basic_blocks(instrs))
