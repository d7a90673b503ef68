"""PSCFT text: writer, tokenizer and reader.

Layout, one function section after another::

    function <name>
    BB_<i>_<j>: <stmt>; <stmt>
    BB_<i>_<j> -> BB_<i>_<k>

Block lines follow block numbering, flow lines are sorted by (j, k). A
function whose blocks hold no call statements is written as its header
alone.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from advcontract.evm.ir import ContractIR
from advcontract.pscft.model import PSCFTDocument

TOKEN_RE = re.compile(r"->|\.\.\.args|[.:;(),]|[A-Za-z0-9_$]+")
_BLOCK_RE = re.compile(r"^BB_(\d+)_(\d+)$")


@dataclass(frozen=True)
class PSCFTFunction:
    name: str
    blocks: tuple[tuple[str, tuple[str, ...]], ...] = ()
    edges: tuple[tuple[str, str], ...] = ()


def _bkey(name: str) -> tuple[int, int]:
    m = _BLOCK_RE.match(name)
    if not m:
        raise ValueError(f"bad block name {name!r}")
    return int(m.group(1)), int(m.group(2))


def pscft_graph(ir: ContractIR) -> tuple[PSCFTFunction, ...]:
    """The annotated graph the text encodes, taken straight from renamed IR."""
    out = []
    for fn in ir.functions:
        if not any(b.statements for b in fn.blocks):
            out.append(PSCFTFunction(fn.canonical_name))
            continue
        bm = fn.block_map
        blocks = sorted(fn.blocks, key=lambda b: _bkey(b.name))
        edges = sorted(
            ((b.name, bm[s].name) for b in fn.blocks for s in b.successors),
            key=lambda e: (_bkey(e[0]), _bkey(e[1])),
        )
        out.append(
            PSCFTFunction(
                fn.canonical_name,
                tuple((b.name, tuple(s.render() for s in b.statements)) for b in blocks),
                tuple(edges),
            )
        )
    return tuple(out)


def write_pscft(graph: tuple[PSCFTFunction, ...]) -> str:
    lines = []
    for f in graph:
        lines.append(f"function {f.name}")
        for name, stmts in f.blocks:
            lines.append(f"{name}: {'; '.join(stmts)}".rstrip())
        for a, b in f.edges:
            lines.append(f"{a} -> {b}")
    return "".join(ln + "\n" for ln in lines)


def read_pscft(text: str) -> tuple[PSCFTFunction, ...]:
    funcs: list[PSCFTFunction] = []
    cur = None
    for n, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        if line.startswith("function "):
            if cur is not None:
                funcs.append(PSCFTFunction(cur[0], tuple(cur[1]), tuple(cur[2])))
            cur = (line[len("function "):], [], [])
        elif cur is None:
            raise ValueError(f"line {n}: content before the first function header")
        elif " -> " in line:
            a, b = line.split(" -> ", 1)
            _bkey(a), _bkey(b)
            cur[2].append((a, b))
        else:
            name, sep, rest = line.partition(":")
            if not sep:
                raise ValueError(f"line {n}: expected a block line")
            _bkey(name)
            rest = rest.strip()
            cur[1].append((name, tuple(rest.split("; ")) if rest else ()))
    if cur is not None:
        funcs.append(PSCFTFunction(cur[0], tuple(cur[1]), tuple(cur[2])))
    return tuple(funcs)


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text)


def contract_id(ir: ContractIR) -> str:
    if ir.address is not None:
        return "0x" + ir.address.hex()
    return "sha256:" + hashlib.sha256(ir.runtime_bytecode).hexdigest()


def serialize_pscft(ir: ContractIR) -> PSCFTDocument:
    text = write_pscft(pscft_graph(ir))
    return PSCFTDocument(contract_id(ir), text, tuple(tokenize(text)))
