"""Etherscan-style explorer adapter.

Response mapping (module=contract&action=getsourcecode): a result entry
with non-empty ``SourceCode`` means verified; ``ContractName`` is used as a
semantic label fallback. ``getcontractcreation`` gives creator and tx hash.
``txlist`` / ``txlistinternal`` give ascending transaction histories.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import httpx

from advcontract.chain.rpc import with_retries
from advcontract.chain.snapshot import CallGate, ReplayMissError

log = logging.getLogger(__name__)


class ExplorerError(RuntimeError):
    pass


@dataclass
class Verification:
    verified: bool
    contract_name: str | None = None
    queried_at: float | None = None
    diagnostics: list[str] = field(default_factory=list)


class EtherscanExplorer:
    service = "explorer"

    def __init__(
        self,
        base_url: str | None,
        api_key: str | None = None,
        gate: CallGate | None = None,
        http: httpx.Client | None = None,
        attempts: int = 3,
        backoff: float = 0.5,
    ):
        self.base_url = base_url
        self.api_key = api_key
        self.gate = gate or CallGate()
        self._http = http
        self.attempts = attempts
        self.backoff = backoff

    @property
    def http(self) -> httpx.Client:
        if self._http is None:
            self._http = httpx.Client(timeout=20.0)
        return self._http

    def _get(self, params: dict) -> object:
        if not self.base_url:
            raise ExplorerError("no explorer endpoint configured")
        q = dict(params)
        if self.api_key:
            q["apikey"] = self.api_key

        def once():
            r = self.http.get(self.base_url, params=q)
            r.raise_for_status()
            return r.json()

        body = with_retries(once, self.attempts, self.backoff, f"{params.get('module')}.{params.get('action')}")
        status = str(body.get("status", "1"))
        result = body.get("result")
        if status != "1" and not (isinstance(result, list) and not result):
            msg = str(body.get("message", ""))
            if "No transactions found" in msg or "No records" in msg:
                return []
            raise ExplorerError(f"explorer error: {msg} {result}")
        return result

    def query(self, module: str, action: str, **params) -> object:
        # the API key is not part of the snapshot key
        p = {"module": module, "action": action, **params}
        return self.gate.call(self.service, f"{module}.{action}", params, lambda: self._get(p))

    def source_code(self, address: str) -> dict:
        res = self.query("contract", "getsourcecode", address=address.lower())
        return res[0] if isinstance(res, list) and res else {}

    def verification(self, address: str) -> Verification:
        entry = self.source_code(address)
        src = entry.get("SourceCode") or ""
        name = entry.get("ContractName") or None
        return Verification(bool(src.strip()), name if src.strip() else None, time.time())

    def contract_name(self, address: bytes | str) -> str | None:
        if isinstance(address, (bytes, bytearray)):
            address = "0x" + bytes(address).hex()
        return self.verification(address).contract_name

    def contract_creation(self, address: str) -> dict | None:
        res = self.query("contract", "getcontractcreation", contractaddresses=address.lower())
        return res[0] if isinstance(res, list) and res else None

    def transactions(self, address: str) -> list[dict]:
        res = self.query("account", "txlist", address=address.lower(), startblock=0, endblock=99999999, sort="asc")
        return list(res or [])

    def internal_transactions(self, address: str) -> list[dict]:
        res = self.query("account", "txlistinternal", address=address.lower(), startblock=0, endblock=99999999, sort="asc")
        return list(res or [])


def get_verification_status(explorer, address: str, diagnostics: list[str] | None = None) -> bool:
    """True iff the explorer reports verified source.

    Failures count as unverified, with a diagnostic, except a replay-strict
    snapshot miss which propagates.
    """
    try:
        return explorer.verification(address).verified
    except ReplayMissError:
        raise
    except Exception as exc:
        msg = f"verification lookup failed for {address}: {exc}; treating as unverified"
        log.warning(msg)
        if diagnostics is not None:
            diagnostics.append(msg)
        return False
