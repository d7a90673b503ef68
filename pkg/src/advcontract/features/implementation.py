"""Implementation-stage features computed from lifted (optionally annotated) IR."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from advcontract.evm.functions import count_opcode
from advcontract.evm.ir import ContractIR, FunctionIR
from advcontract.features.model import ImplementationFeatures
from advcontract.hashing import selector_of

_EXTERNAL = frozenset({"CALL", "STATICCALL", "DELEGATECALL", "CALLCODE"})


def _read_signature_list(text: str) -> frozenset[bytes]:
    out = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "(" in line:
            out.add(selector_of(line))
        else:
            out.add(bytes.fromhex(line.removeprefix("0x").rjust(8, "0")))
    return frozenset(out)


@dataclass(frozen=True)
class FeatureConfig:
    flashloan_selectors: frozenset[bytes]
    token_selectors: frozenset[bytes]

    @classmethod
    def default(cls) -> "FeatureConfig":
        data = resources.files("advcontract.data")
        return cls(
            _read_signature_list(data.joinpath("flashloan_callbacks.txt").read_text()),
            _read_signature_list(data.joinpath("token_signatures.txt").read_text()),
        )

    @classmethod
    def from_files(cls, flashloan: str | Path | None = None, token: str | Path | None = None) -> "FeatureConfig":
        base = cls.default()
        fl = _read_signature_list(Path(flashloan).read_text()) if flashloan else base.flashloan_selectors
        tk = _read_signature_list(Path(token).read_text()) if token else base.token_selectors
        return cls(fl, tk)


def _stmt_key(fn: FunctionIR, bid: int, i: int) -> tuple[int, int, int]:
    return (fn.entry_block, bid, i)


def reachable_statements(ir: ContractIR, fn: FunctionIR) -> list:
    """Statements reachable from ``fn``'s entry, following private calls into their callees."""
    by_entry = ir.function_by_entry
    seen_keys: set = set()
    out = []
    seen_funcs: set[int] = set()
    todo = [fn.entry_block]
    while todo:
        entry = todo.pop()
        if entry in seen_funcs or entry not in by_entry:
            continue
        seen_funcs.add(entry)
        f = by_entry[entry]
        bm = f.block_map
        stack = [f.entry_block]
        seen_b = {f.entry_block}
        while stack:
            bid = stack.pop()
            for i, s in enumerate(bm[bid].statements):
                key = _stmt_key(f, bid, i)
                if key not in seen_keys:
                    seen_keys.add(key)
                    out.append(s)
                if s.op == "CALLPRIVATE" and s.callee is not None:
                    todo.append(s.callee)
            for nxt in bm[bid].successors:
                if nxt not in seen_b and nxt in bm:
                    seen_b.add(nxt)
                    stack.append(nxt)
    return out


def extract_implementation_features(ir: ContractIR, config: FeatureConfig | None = None) -> ImplementationFeatures:
    config = config or FeatureConfig.default()
    publics = [f for f in ir.functions if f.visibility == "public"]
    privates = [f for f in ir.functions if f.visibility == "private"]
    n_pub = len(publics)

    def is_token(s) -> bool:
        return s.op in _EXTERNAL and s.selector is not None and s.selector in config.token_selectors

    ext_calls = [s for b in ir.all_blocks() for s in b.statements if s.op in _EXTERNAL]
    token_calls = sum(1 for s in ext_calls if is_token(s))
    flash = sum(1 for f in publics if f.selector in config.flashloan_selectors)
    per_fn = [sum(1 for s in reachable_statements(ir, f) if is_token(s)) for f in publics]
    return ImplementationFeatures(
        func_count=n_pub + len(privates),
        public_func_count=n_pub,
        flashloan_callback_count=flash,
        flashloan_callback_ratio=flash / n_pub if n_pub else 0.0,
        token_call_count=token_calls,
        token_call_ratio=token_calls / len(ext_calls) if ext_calls else 0.0,
        max_token_call_count=max(per_fn, default=0),
        avg_token_call_count=sum(per_fn) / n_pub if n_pub else 0.0,
        delegate_call_count=count_opcode(ir, "DELEGATECALL"),
        selfdestruct_count=count_opcode(ir, "SELFDESTRUCT"),
    )
