from __future__ import annotations

from advcontract.evm.cfg import build_cfg
from advcontract.evm.disasm import disassemble, parse_bytecode


def split_creation_code(creation: bytes | str) -> tuple[bytes, list[str]]:
    """Extract runtime code from deployment input data.

    Looks for the usual constructor epilogue, a ``CODECOPY`` with constant
    arguments in a block that ends with ``RETURN``. When no such copy is
    found the whole blob is returned as runtime code, with a diagnostic.
    """
    code = parse_bytecode(creation)
    if not code:
        return b"", ["empty creation input"]
    cfg = build_cfg(disassemble(code))
    for bid in cfg.order:
        if bid not in cfg.reached:
            continue
        block = cfg.blocks[bid]
        if block.statements[-1].name != "RETURN":
            continue
        for ins in block.statements:
            if ins.name != "CODECOPY":
                continue
            for args in cfg.observed_args.get(ins.offset, ()):
                _dest, off, size = args
                if off is None or size is None or size == 0:
                    continue
                if off + size <= len(code):
                    return code[off : off + size], []
    return code, ["constructor split failed; treating the whole input as runtime code"]
