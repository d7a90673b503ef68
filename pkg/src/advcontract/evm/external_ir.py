"""Line-oriented text format for IR produced by other lifters.

::

    contract address=0x5777d92f208679db4b9778590fa3cab3ac9e2168
    function transfer public selector=0xa9059cbb signature=transfer(address,uint256)
    block 0x1f preds= succs=0x40
        0x20 CALL target=0x... selector=0x490e6cbc
    block 0x40 preds=0x1f succs=
        0x41 CALLPRIVATE callee=0x100
    function private_0x100 private
    block 0x100 preds= succs=
        0x101 STATICCALL

The first block of a function is its entry. Id lists are comma separated
hex or decimal and may be empty. Statement lines are indented and start
with the statement offset. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

from collections import Counter

from advcontract.evm.ir import BasicBlock, ContractIR, FunctionIR, Statement

_STMT_KEYS = ("operand", "target", "selector", "callee")


class ExternalIRError(ValueError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


def _int(tok: str, line: int, col: int) -> int:
    try:
        return int(tok, 16) if tok.lower().startswith("0x") else int(tok)
    except ValueError:
        raise ExternalIRError(f"bad number {tok!r}", line, col) from None


def _hexbytes(tok: str, width: int, line: int, col: int) -> bytes:
    try:
        v = int(tok, 16)
    except ValueError:
        raise ExternalIRError(f"bad hex value {tok!r}", line, col) from None
    if v >= 1 << (8 * width):
        raise ExternalIRError(f"value {tok!r} wider than {width} bytes", line, col)
    return v.to_bytes(width, "big")


def _tokens(raw: str) -> list[tuple[str, int]]:
    """Whitespace tokens with their 1-based column."""
    out = []
    i = 0
    n = len(raw)
    while i < n:
        while i < n and raw[i] in " \t":
            i += 1
        j = i
        while j < n and raw[j] not in " \t":
            j += 1
        if j > i:
            out.append((raw[i:j], i + 1))
        i = j
    return out


def _kv(tok: str, col: int, line: int) -> tuple[str, str]:
    if "=" not in tok:
        raise ExternalIRError(f"expected key=value, got {tok!r}", line, col)
    k, v = tok.split("=", 1)
    return k, v


def _idlist(val: str, line: int, col: int) -> list[int]:
    return [_int(p, line, col) for p in val.split(",") if p]


def ingest_external_ir(text: str) -> ContractIR:
    address = None
    funcs: list[dict] = []
    cur_block = None
    block_lines: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        toks = _tokens(raw)
        indented = raw[0] in " \t"
        head, hcol = toks[0]
        if indented:
            if cur_block is None:
                raise ExternalIRError("statement outside a block", lineno, hcol)
            if len(toks) < 2:
                raise ExternalIRError("statement needs an offset and an opcode", lineno, hcol)
            off = _int(head, lineno, hcol)
            op, ocol = toks[1]
            if not op.replace("_", "").isalnum() or not op.isupper():
                raise ExternalIRError(f"bad opcode {op!r}", lineno, ocol)
            kw: dict = {}
            for tok, col in toks[2:]:
                k, v = _kv(tok, col, lineno)
                if k == "operand":
                    kw["operand"] = _int(v, lineno, col)
                elif k == "target":
                    kw["target_address"] = _hexbytes(v, 20, lineno, col)
                elif k == "selector":
                    kw["selector"] = _hexbytes(v, 4, lineno, col)
                elif k == "callee":
                    kw["callee"] = _int(v, lineno, col)
                else:
                    raise ExternalIRError(f"unknown statement attribute {k!r}", lineno, col)
            cur_block["stmts"].append(Statement(off, op, **kw))
        elif head == "contract":
            for tok, col in toks[1:]:
                k, v = _kv(tok, col, lineno)
                if k != "address":
                    raise ExternalIRError(f"unknown contract attribute {k!r}", lineno, col)
                address = _hexbytes(v, 20, lineno, col)
        elif head == "function":
            if len(toks) < 3:
                raise ExternalIRError("function needs a name and a visibility", lineno, hcol)
            name, vis = toks[1][0], toks[2][0]
            if vis not in ("public", "private", "fallback"):
                raise ExternalIRError(f"bad visibility {vis!r}", lineno, toks[2][1])
            fn = {"name": name, "vis": vis, "selector": None, "signature": None, "blocks": [], "line": lineno}
            for tok, col in toks[3:]:
                k, v = _kv(tok, col, lineno)
                if k == "selector":
                    fn["selector"] = _hexbytes(v, 4, lineno, col)
                elif k == "signature":
                    fn["signature"] = v
                else:
                    raise ExternalIRError(f"unknown function attribute {k!r}", lineno, col)
            if vis == "public" and fn["selector"] is None:
                raise ExternalIRError("public function without selector", lineno, hcol)
            if vis != "public" and fn["selector"] is not None:
                raise ExternalIRError(f"{vis} function with selector", lineno, hcol)
            funcs.append(fn)
            cur_block = None
        elif head == "block":
            if not funcs:
                raise ExternalIRError("block outside a function", lineno, hcol)
            if len(toks) != 4:
                raise ExternalIRError("block needs an id, preds= and succs=", lineno, hcol)
            bid = _int(toks[1][0], lineno, toks[1][1])
            if bid in block_lines:
                raise ExternalIRError(f"duplicate block id 0x{bid:x}", lineno, toks[1][1])
            block_lines[bid] = lineno
            k1, v1 = _kv(*toks[2], lineno)
            k2, v2 = _kv(*toks[3], lineno)
            if (k1, k2) != ("preds", "succs"):
                raise ExternalIRError("expected preds=... succs=...", lineno, toks[2][1])
            cur_block = {
                "id": bid,
                "preds": _idlist(v1, lineno, toks[2][1]),
                "succs": _idlist(v2, lineno, toks[3][1]),
                "stmts": [],
                "line": lineno,
                "pcol": toks[2][1],
                "scol": toks[3][1],
            }
            funcs[-1]["blocks"].append(cur_block)
        else:
            raise ExternalIRError(f"unexpected {head!r}", lineno, hcol)

    functions = []
    counts: Counter = Counter()
    for fn in funcs:
        if not fn["blocks"]:
            raise ExternalIRError(f"function {fn['name']!r} has no blocks", fn["line"], 1)
        local = {b["id"]: b for b in fn["blocks"]}
        for b in fn["blocks"]:
            for s in b["succs"]:
                if s not in local:
                    raise ExternalIRError(f"successor 0x{s:x} is not a block of this function", b["line"], b["scol"])
                if b["id"] not in local[s]["preds"]:
                    raise ExternalIRError(
                        f"block 0x{s:x} does not list 0x{b['id']:x} as a predecessor", b["line"], b["scol"]
                    )
            for p in b["preds"]:
                if p not in local:
                    raise ExternalIRError(f"predecessor 0x{p:x} is not a block of this function", b["line"], b["pcol"])
                if b["id"] not in local[p]["succs"]:
                    raise ExternalIRError(
                        f"block 0x{p:x} does not list 0x{b['id']:x} as a successor", b["line"], b["pcol"]
                    )
        blocks = tuple(
            BasicBlock(b["id"], tuple(b["stmts"]), frozenset(b["preds"]), frozenset(b["succs"])) for b in fn["blocks"]
        )
        for b in blocks:
            counts.update(s.op for s in b.statements if s.op != "CALLPRIVATE")
        functions.append(
            FunctionIR(
                blocks[0].id,
                fn["vis"],
                fn["name"],
                blocks,
                selector=fn["selector"],
                signature=fn["signature"],
            )
        )
    return ContractIR(functions=tuple(functions), address=address, opcode_counts=dict(counts))


def _ids(ids) -> str:
    return ",".join(f"0x{i:x}" for i in sorted(ids))


def serialize_external_ir(ir: ContractIR) -> str:
    lines = []
    if ir.address is not None:
        lines.append(f"contract address=0x{ir.address.hex()}")
    for fn in ir.functions:
        head = f"function {fn.canonical_name} {fn.visibility}"
        if fn.selector is not None:
            head += f" selector=0x{fn.selector.hex()}"
        if fn.signature:
            head += f" signature={fn.signature}"
        lines.append(head)
        entry = fn.block(fn.entry_block)
        ordered = [entry] + [b for b in fn.blocks if b.id != fn.entry_block]
        for b in ordered:
            lines.append(f"block 0x{b.id:x} preds={_ids(b.predecessors)} succs={_ids(b.successors)}")
            for s in b.statements:
                line = f"    0x{s.offset:x} {s.op}"
                if s.operand is not None:
                    line += f" operand=0x{s.operand:x}"
                if s.target_address is not None:
                    line += f" target=0x{s.target_address.hex()}"
                if s.selector is not None:
                    line += f" selector=0x{s.selector.hex()}"
                if s.callee is not None:
                    line += f" callee=0x{s.callee:x}"
                lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


def normalize_external_ir(text: str) -> str:
    """Canonical spelling of a document, computed on the text alone.

    Drops comments and blank lines, collapses whitespace, lower-cases and
    re-encodes numbers as minimal hex, sorts id lists and orders attributes.
    """

    def num(tok: str) -> str:
        v = int(tok, 16) if tok.lower().startswith("0x") else int(tok)
        return f"0x{v:x}"

    def padded(tok: str, width: int) -> str:
        return "0x" + int(tok, 16).to_bytes(width, "big").hex()

    out = []
    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        toks = raw.split()
        if raw[0] in " \t":
            attrs = dict(t.split("=", 1) for t in toks[2:])
            line = f"    {num(toks[0])} {toks[1]}"
            if "operand" in attrs:
                line += f" operand={num(attrs['operand'])}"
            if "target" in attrs:
                line += f" target={padded(attrs['target'], 20)}"
            if "selector" in attrs:
                line += f" selector={padded(attrs['selector'], 4)}"
            if "callee" in attrs:
                line += f" callee={num(attrs['callee'])}"
            out.append(line)
        elif toks[0] == "contract":
            out.append(f"contract address={padded(toks[1].split('=', 1)[1], 20)}")
        elif toks[0] == "function":
            attrs = dict(t.split("=", 1) for t in toks[3:])
            line = f"function {toks[1]} {toks[2]}"
            if "selector" in attrs:
                line += f" selector={padded(attrs['selector'], 4)}"
            if "signature" in attrs:
                line += f" signature={attrs['signature']}"
            out.append(line)
        else:
            p = sorted(int(x, 16) if x.lower().startswith("0x") else int(x) for x in toks[2][6:].split(",") if x)
            s = sorted(int(x, 16) if x.lower().startswith("0x") else int(x) for x in toks[3][6:].split(",") if x)
            out.append(f"block {num(toks[1])} preds={_ids(p)} succs={_ids(s)}")
    return "\n".join(out) + ("\n" if out else "")
