"""Block monitor yielding contract-deployment events in (block, tx index) order."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass
from typing import Iterator

from advcontract.chain.address import contract_address
from advcontract.chain.snapshot import ReplayMissError

log = logging.getLogger(__name__)


def _int(v) -> int:
    if v is None:
        return 0
    if isinstance(v, str):
        return int(v, 16) if v.startswith("0x") else int(v)
    return int(v)


@dataclass(frozen=True)
class DeploymentEvent:
    contract_address: str
    creator_address: str
    tx_hash: str
    block_number: int
    tx_index: int
    block_timestamp: int
    creation_input: bytes
    value: int
    gas_used: int
    nonce: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["creation_input"] = "0x" + self.creation_input.hex()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeploymentEvent":
        d = dict(d)
        d["creation_input"] = bytes.fromhex(d["creation_input"].removeprefix("0x"))
        return cls(**d)

    @property
    def order_key(self) -> tuple[int, int]:
        return (self.block_number, self.tx_index)


@dataclass(frozen=True)
class StreamError:
    block_number: int
    message: str


def events_in_block(rpc, number: int) -> list[DeploymentEvent]:
    block = rpc.get_block(number, True)
    if block is None:
        raise LookupError(f"block {number} not available")
    ts = _int(block.get("timestamp"))
    txs = sorted(block.get("transactions", []), key=lambda t: _int(t.get("transactionIndex")))
    out = []
    for tx in txs:
        if isinstance(tx, str) or tx.get("to") not in (None, "", "0x"):
            continue
        receipt = rpc.get_receipt(tx["hash"]) or {}
        creator = tx["from"].lower()
        nonce = _int(tx.get("nonce"))
        addr = (receipt.get("contractAddress") or contract_address(creator, nonce)).lower()
        data = tx.get("input") or "0x"
        out.append(
            DeploymentEvent(
                contract_address=addr,
                creator_address=creator,
                tx_hash=tx["hash"],
                block_number=number,
                tx_index=_int(tx.get("transactionIndex")),
                block_timestamp=ts,
                creation_input=bytes.fromhex(data.removeprefix("0x")),
                value=_int(tx.get("value")),
                gas_used=_int(receipt.get("gasUsed")),
                nonce=nonce,
            )
        )
    return out


def watch_blocks(
    rpc,
    from_block: int,
    to_block: int | None = None,
    follow: bool = False,
    poll_interval: float = 2.0,
    gap_attempts: int = 3,
) -> Iterator[DeploymentEvent | StreamError]:
    """Yield deployment events block by block.

    Without ``to_block`` the head at start time bounds the scan, unless
    ``follow`` keeps polling for new heads. A block that stays unavailable
    after ``gap_attempts`` tries becomes a StreamError item and the scan
    moves on. Creations made by internal message calls are not emitted.
    """
    n = from_block
    head = to_block if to_block is not None else rpc.block_number()
    while True:
        while n <= head:
            events, err = _fetch_block(rpc, n, gap_attempts, poll_interval)
            if events is None:
                yield StreamError(n, err)
            else:
                yield from events
            n += 1
        if not follow or to_block is not None:
            return
        time.sleep(poll_interval)
        head = rpc.block_number()


def _fetch_block(rpc, n: int, attempts: int, poll_interval: float):
    err = ""
    for attempt in range(attempts):
        try:
            return events_in_block(rpc, n), ""
        except ReplayMissError as exc:
            return None, str(exc)
        except Exception as exc:
            err = str(exc)
            log.warning("block %d: %s (attempt %d/%d)", n, err, attempt + 1, attempts)
            if attempt < attempts - 1:
                time.sleep(min(poll_interval, 0.05 * 2**attempt))
    return None, err
