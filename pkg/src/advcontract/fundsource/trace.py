"""Deployer fund-source tracing."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from typing import Protocol

from advcontract.labels import AddressLabelDB, FundSourceCategory, normalize_address

log = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 10
_STOPPING = (FundSourceCategory.SAFE, FundSourceCategory.ANONYMOUS, FundSourceCategory.BRIDGE)


class FundingGraphProvider(Protocol):
    def earliest_incoming_funder(self, address: str) -> str | None: ...


@dataclass
class TraceResult:
    category: FundSourceCategory
    path: list[str] = field(default_factory=list)  # funders visited, nearest first
    label: str | None = None
    reason: str = ""
    diagnostics: list[str] = field(default_factory=list)


def trace_fund_source_detailed(
    deployer: str,
    provider: FundingGraphProvider,
    labels: AddressLabelDB,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> TraceResult:
    """Follow earliest funders from the deployer until a decisive label.

    Labels in the Unknown category do not end the walk. At most
    ``max_depth`` provider calls are made.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be positive")
    current = normalize_address(deployer)
    visited = {current}
    path: list[str] = []
    for _ in range(max_depth):
        try:
            funder = provider.earliest_incoming_funder(current)
        except Exception as exc:
            msg = f"funding provider failed at {current}: {exc}"
            log.warning(msg)
            return TraceResult(FundSourceCategory.UNKNOWN, path, reason="provider-error", diagnostics=[msg])
        if funder is None:
            return TraceResult(FundSourceCategory.UNKNOWN, path, reason="no-funder")
        funder = normalize_address(funder)
        if funder in visited:
            return TraceResult(FundSourceCategory.UNKNOWN, path + [funder], reason="cycle")
        visited.add(funder)
        path.append(funder)
        hit = labels.lookup(funder)
        if hit is not None and hit[1] in _STOPPING:
            return TraceResult(hit[1], path, label=hit[0], reason="label")
        current = funder
    return TraceResult(FundSourceCategory.UNKNOWN, path, reason="max-depth")


def trace_fund_source(
    deployer: str,
    provider: FundingGraphProvider,
    labels: AddressLabelDB,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> FundSourceCategory:
    return trace_fund_source_detailed(deployer, provider, labels, max_depth).category


class FundTracer:
    """Thread-safe tracer with results cached per deployer."""

    def __init__(self, provider: FundingGraphProvider, labels: AddressLabelDB, max_depth: int = DEFAULT_MAX_DEPTH):
        self.provider = provider
        self.labels = labels
        self.max_depth = max_depth
        self._cache: dict[str, TraceResult] = {}
        self._lock = threading.Lock()

    def trace(self, deployer: str) -> TraceResult:
        key = normalize_address(deployer)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        res = trace_fund_source_detailed(key, self.provider, self.labels, self.max_depth)
        if not res.diagnostics:  # don't pin transient provider failures
            with self._lock:
                self._cache[key] = res
        return res
