"""Tiny two-pass EVM assembler used to build fixtures and synthetic contracts.

Syntax, one item per line (``;`` starts a comment)::

    start:              ; label, emits JUMPDEST
    PUSH1 0x2a
    PUSH2 @start        ; label reference, resolved to the label's offset
    PUSH @start         ; same, defaults to PUSH2
    PUSH20 0x5777...
    .bytes 0xdeadbeef   ; raw bytes
"""

from __future__ import annotations

import re

from advcontract.evm.opcodes import BY_NAME

_LABEL_RE = re.compile(r"^([A-Za-z_][\w.$]*):$")


class AssemblyError(ValueError):
    pass


def _parse_int(tok: str) -> int:
    return int(tok, 16) if tok.lower().startswith("0x") else int(tok)


def assemble_text(source: str) -> bytes:
    items: list[tuple] = []
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        for part in line.split("|"):
            part = part.strip()
            if part:
                items.append(_parse_item(part, lineno))
    return _emit(items)


def assemble_items(items: list[str | tuple]) -> bytes:
    """Assemble a list of ``"MNEMONIC arg"`` strings or ``(mnemonic, arg)`` tuples."""
    parsed = []
    for it in items:
        if isinstance(it, tuple):
            it = " ".join(str(x) for x in it)
        parsed.append(_parse_item(it, 0))
    return _emit(parsed)


def _parse_item(text: str, lineno: int) -> tuple:
    m = _LABEL_RE.match(text)
    if m:
        return ("label", m.group(1))
    parts = text.split()
    head = parts[0].upper()
    if head == ".BYTES":
        if len(parts) != 2:
            raise AssemblyError(f"line {lineno}: .bytes takes one hex argument")
        data = parts[1][2:] if parts[1].lower().startswith("0x") else parts[1]
        return ("raw", bytes.fromhex(data))
    if head == "PUSH" and len(parts) == 2 and parts[1].startswith("@"):
        head = "PUSH2"
    info = BY_NAME.get(head)
    if info is None:
        raise AssemblyError(f"line {lineno}: unknown mnemonic {parts[0]!r}")
    width = info.byte - 0x5F if 0x60 <= info.byte <= 0x7F else 0
    if width:
        if len(parts) != 2:
            raise AssemblyError(f"line {lineno}: {head} needs an operand")
        arg = parts[1]
        if arg.startswith("@"):
            return ("push_label", info.byte, width, arg[1:])
        value = _parse_int(arg)
        if value >= 1 << (8 * width):
            raise AssemblyError(f"line {lineno}: operand too wide for {head}")
        return ("op", info.byte, value.to_bytes(width, "big"))
    if len(parts) != 1:
        raise AssemblyError(f"line {lineno}: {head} takes no operand")
    return ("op", info.byte, None)


def _emit(items: list[tuple]) -> bytes:
    labels: dict[str, int] = {}
    pc = 0
    for it in items:
        kind = it[0]
        if kind == "label":
            if it[1] in labels:
                raise AssemblyError(f"duplicate label {it[1]!r}")
            labels[it[1]] = pc
            pc += 1
        elif kind == "raw":
            pc += len(it[1])
        elif kind == "push_label":
            pc += 1 + it[2]
        else:
            pc += 1 + (len(it[2]) if it[2] is not None else 0)
    out = bytearray()
    for it in items:
        kind = it[0]
        if kind == "label":
            out.append(0x5B)
        elif kind == "raw":
            out += it[1]
        elif kind == "push_label":
            _, byte, width, name = it
            if name not in labels:
                raise AssemblyError(f"undefined label {name!r}")
            out.append(byte)
            out += labels[name].to_bytes(width, "big")
        else:
            out.append(it[1])
            if it[2] is not None:
                out += it[2]
    return bytes(out)
