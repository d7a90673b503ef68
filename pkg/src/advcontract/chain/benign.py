"""Benign dataset candidates: enough distinct callers, and not a token or proxy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from advcontract.chain.monitor import DeploymentEvent
from advcontract.evm import lift, split_creation_code
from advcontract.pscft.standards import OTHER, detect_standard_contract

DEFAULT_MIN_CALLERS = 10


@dataclass(frozen=True)
class CandidateDecision:
    address: str
    unique_callers: int
    standard: str
    kept: bool
    reason: str


def standard_of_event(ev: DeploymentEvent) -> str:
    runtime, _ = split_creation_code(ev.creation_input)
    return detect_standard_contract(lift(runtime))


def unique_callers(txs: Iterable[dict], address: str, window: tuple[int, int] | None = None) -> int:
    callers = set()
    for tx in txs:
        if (tx.get("to") or "").lower() != address.lower():
            continue
        if window is not None:
            ts = int(tx.get("timeStamp", tx.get("timestamp", 0)) or 0)
            if not window[0] <= ts <= window[1]:
                continue
        callers.add(tx["from"].lower())
    return len(callers)


def classify_benign_candidates(
    events: Iterable[DeploymentEvent],
    tx_history_provider,
    min_unique_callers: int = DEFAULT_MIN_CALLERS,
    window: tuple[int, int] | None = None,
    standard_of: Callable[[DeploymentEvent], str] = standard_of_event,
) -> list[CandidateDecision]:
    out = []
    for ev in events:
        n = unique_callers(tx_history_provider.transactions(ev.contract_address), ev.contract_address, window)
        std = standard_of(ev)
        if n < min_unique_callers:
            out.append(CandidateDecision(ev.contract_address, n, std, False, "few-callers"))
        elif std != OTHER:
            out.append(CandidateDecision(ev.contract_address, n, std, False, std))
        else:
            out.append(CandidateDecision(ev.contract_address, n, std, True, "kept"))
    return out


def build_benign_candidates(
    events: Iterable[DeploymentEvent],
    tx_history_provider,
    min_unique_callers: int = DEFAULT_MIN_CALLERS,
    window: tuple[int, int] | None = None,
    standard_of: Callable[[DeploymentEvent], str] = standard_of_event,
) -> list[str]:
    return [
        d.address
        for d in classify_benign_candidates(events, tx_history_provider, min_unique_callers, window, standard_of)
        if d.kept
    ]
