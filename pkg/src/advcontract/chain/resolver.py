"""Selector resolution: local database first, then a memoized 4byte-style lookup."""

from __future__ import annotations

import logging
import threading

import httpx

from advcontract.chain.rpc import with_retries
from advcontract.chain.snapshot import CallGate, ReplayMissError
from advcontract.hashing import selector_of
from advcontract.signatures import SignatureDB

log = logging.getLogger(__name__)

FOURBYTE_URL = "https://www.4byte.directory/api/v1/signatures/"


class FourByteClient:
    service = "4byte"

    def __init__(self, url: str | None = FOURBYTE_URL, gate: CallGate | None = None, http: httpx.Client | None = None):
        self.url = url
        self.gate = gate or CallGate()
        self._http = http

    @property
    def http(self) -> httpx.Client:
        if self._http is None:
            self._http = httpx.Client(timeout=10.0)
        return self._http

    def _fetch(self, hexsel: str) -> list[dict]:
        def once():
            r = self.http.get(self.url, params={"hex_signature": hexsel})
            r.raise_for_status()
            return r.json()

        body = with_retries(once, 2, 0.5, "4byte")
        return [{"id": x.get("id"), "text_signature": x.get("text_signature")} for x in body.get("results", [])]

    def lookup(self, selector: bytes) -> str | None:
        if not self.url:
            return None
        hexsel = "0x" + selector.hex()
        rows = self.gate.call(self.service, "signatures", {"hex_signature": hexsel}, lambda: self._fetch(hexsel))
        # oldest consistent submission wins; later ones are often collisions
        for row in sorted(rows, key=lambda r: (r.get("id") or 0)):
            sig = row.get("text_signature")
            if sig and selector_of(sig) == selector:
                return sig
        return None


class SelectorResolver:
    def __init__(self, local: SignatureDB | None = None, remote: FourByteClient | None = None):
        self.local = local or SignatureDB()
        self.remote = remote
        self._memo: dict[bytes, str | None] = {}
        self._lock = threading.Lock()
        self.remote_calls = 0
        self.diagnostics: list[str] = []

    def resolve(self, selector: bytes) -> str | None:
        selector = bytes(selector)
        hit = self.local.resolve(selector)
        if hit:
            return hit
        with self._lock:
            if selector in self._memo:
                return self._memo[selector]
        if self.remote is None:
            return None
        try:
            self.remote_calls += 1
            sig = self.remote.lookup(selector)
        except ReplayMissError:
            raise
        except Exception as exc:
            self.diagnostics.append(f"selector lookup failed for 0x{selector.hex()}: {exc}")
            return None
        with self._lock:
            self._memo[selector] = sig  # idempotent, last writer wins
        return sig

    def get(self, selector: bytes, default=None):
        """Mapping-style access so the lifter can name public functions."""
        return self.resolve(selector) or default


def resolve_selector(resolver: SelectorResolver, selector: bytes) -> str | None:
    return resolver.resolve(selector)
