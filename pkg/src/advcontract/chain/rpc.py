"""Minimal Ethereum JSON-RPC client with bounded retries and snapshot support."""

from __future__ import annotations

import itertools
import logging
import threading
import time
from typing import Any

import httpx

from advcontract.chain.snapshot import CallGate

log = logging.getLogger(__name__)

RETRYABLE = (httpx.TransportError, httpx.HTTPStatusError)


class RPCError(RuntimeError):
    def __init__(self, method: str, error: Any):
        super().__init__(f"{method}: {error}")
        self.method = method
        self.error = error


def with_retries(fn, attempts: int, backoff: float, what: str):
    """Call ``fn`` up to ``attempts`` times on transport errors, doubling the wait."""
    delay = backoff
    for i in range(attempts):
        try:
            return fn()
        except RETRYABLE as exc:
            if i == attempts - 1:
                raise
            log.info("%s failed (%s); retry %d/%d in %.2fs", what, exc, i + 1, attempts - 1, delay)
            time.sleep(delay)
            delay *= 2


class JsonRpcClient:
    service = "rpc"

    def __init__(
        self,
        url: str | None,
        gate: CallGate | None = None,
        http: httpx.Client | None = None,
        attempts: int = 3,
        backoff: float = 0.5,
        timeout: float = 20.0,
    ):
        self.url = url
        self.gate = gate or CallGate()
        self._http = http
        self._timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    @property
    def http(self) -> httpx.Client:
        if self._http is None:
            self._http = httpx.Client(timeout=self._timeout)
        return self._http

    def _post(self, method: str, params: list) -> Any:
        if not self.url:
            raise RPCError(method, "no RPC endpoint configured")
        with self._lock:
            rid = next(self._ids)

        def once():
            r = self.http.post(self.url, json={"jsonrpc": "2.0", "id": rid, "method": method, "params": params})
            r.raise_for_status()
            return r.json()

        body = with_retries(once, self.attempts, self.backoff, method)
        if "error" in body:
            raise RPCError(method, body["error"])
        return body.get("result")

    def request(self, method: str, params: list) -> Any:
        return self.gate.call(self.service, method, params, lambda: self._post(method, params))

    def block_number(self) -> int:
        return int(self.request("eth_blockNumber", []), 16)

    def get_block(self, number: int, full: bool = True) -> dict | None:
        return self.request("eth_getBlockByNumber", [hex(number), full])

    def get_transaction(self, tx_hash: str) -> dict | None:
        return self.request("eth_getTransactionByHash", [tx_hash])

    def get_receipt(self, tx_hash: str) -> dict | None:
        return self.request("eth_getTransactionReceipt", [tx_hash])

    def get_code(self, address: str, block: str = "latest") -> str:
        return self.request("eth_getCode", [address, block])

    def get_transaction_count(self, address: str, block: str = "latest") -> int:
        return int(self.request("eth_getTransactionCount", [address, block]), 16)
