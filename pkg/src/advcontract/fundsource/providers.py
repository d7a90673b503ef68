"""Funding-graph providers: a text fixture graph and an explorer-backed one."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from advcontract.labels import normalize_address

_EDGE_RE = re.compile(
    r"^\s*(0x[0-9a-fA-F]{40})\s*->\s*(0x[0-9a-fA-F]{40})\s+block=(\d+)\s+index=(\d+)\s+value=(\d+)\s*$"
)


@dataclass(frozen=True)
class Transfer:
    funder: str
    fundee: str
    block: int
    index: int
    value: int


def parse_fixture_graph(text: str) -> list[Transfer]:
    """Lines ``<funder> -> <fundee> block=<n> index=<n> value=<wei>``; ``#`` comments."""
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _EDGE_RE.match(line)
        if not m:
            raise ValueError(f"fixture graph line {n}: cannot parse {raw!r}")
        a, b, blk, idx, val = m.groups()
        out.append(Transfer(normalize_address(a), normalize_address(b), int(blk), int(idx), int(val)))
    return out


def format_fixture_graph(transfers: Iterable[Transfer]) -> str:
    return "".join(f"{t.funder} -> {t.fundee} block={t.block} index={t.index} value={t.value}\n" for t in transfers)


class FixtureGraphProvider:
    def __init__(self, transfers: Iterable[Transfer]):
        self._first: dict[str, tuple[int, int, str]] = {}
        for t in transfers:
            if t.value <= 0:
                continue
            key = (t.block, t.index, t.funder)
            cur = self._first.get(t.fundee)
            if cur is None or key < cur:
                self._first[t.fundee] = key
        self.calls = 0

    @classmethod
    def from_text(cls, text: str) -> "FixtureGraphProvider":
        return cls(parse_fixture_graph(text))

    @classmethod
    def load(cls, path: str | Path) -> "FixtureGraphProvider":
        return cls.from_text(Path(path).read_text())

    def earliest_incoming_funder(self, address: str) -> str | None:
        self.calls += 1
        hit = self._first.get(normalize_address(address))
        return hit[2] if hit else None


class TxHistory(Protocol):
    def transactions(self, address: str) -> list[dict]: ...

    def internal_transactions(self, address: str) -> list[dict]: ...


class ExplorerFundingProvider:
    """Earliest value-bearing incoming transfer from explorer transaction lists.

    Internal (message-call) transfers are considered when the explorer
    exposes them; ordering key is (block number, transaction index), with
    internal transfers placed after the top-level transaction at the same
    position.
    """

    def __init__(self, explorer: TxHistory, include_internal: bool = True):
        self.explorer = explorer
        self.include_internal = include_internal

    def earliest_incoming_funder(self, address: str) -> str | None:
        addr = normalize_address(address)
        best = None
        sources = [(0, self.explorer.transactions(addr))]
        if self.include_internal:
            sources.append((1, self.explorer.internal_transactions(addr)))
        for rank, txs in sources:
            for tx in txs:
                to = (tx.get("to") or "").lower()
                if to != addr or int(tx.get("value", 0) or 0) <= 0:
                    continue
                if str(tx.get("isError", "0")) == "1":
                    continue
                key = (int(tx.get("blockNumber", 0)), int(tx.get("transactionIndex", 0) or 0), rank)
                if best is None or key < best[0]:
                    best = (key, normalize_address(tx["from"]))
        return best[1] if best else None
