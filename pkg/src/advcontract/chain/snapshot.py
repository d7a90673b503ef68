"""Content-addressed request/response store and the mode-aware call gate.

Each entry lives at ``<root>/<key[:2]>/<key>.json`` where ``key`` is the
SHA-256 of the canonical JSON of ``{service, method, params}``. The file
holds ``{"request": ..., "response": ...}``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Callable

log = logging.getLogger(__name__)

MODES = ("live", "record", "replay-strict")


class ReplayMissError(LookupError):
    """A request had no stored response while running replay-strict."""


def canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def request_key(service: str, method: str, params: Any) -> str:
    return hashlib.sha256(canonical({"service": service, "method": method, "params": params}).encode()).hexdigest()


class SnapshotStore:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._mem: dict[str, Any] = {}
        self._lock = threading.Lock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, service: str, method: str, params: Any) -> tuple[bool, Any]:
        key = request_key(service, method, params)
        with self._lock:
            if key in self._mem:
                return True, self._mem[key]
        if self.root is not None:
            p = self._path(key)
            if p.exists():
                resp = json.loads(p.read_text())["response"]
                with self._lock:
                    self._mem[key] = resp
                return True, resp
        return False, None

    def put(self, service: str, method: str, params: Any, response: Any) -> None:
        """Store once. An existing entry is never replaced."""
        key = request_key(service, method, params)
        ok, old = self.get(service, method, params)
        if ok:
            if canonical(old) != canonical(response):
                log.warning("snapshot conflict for %s.%s; keeping the stored response", service, method)
            return
        with self._lock:
            self._mem[key] = response
        if self.root is None:
            return
        p = self._path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        body = canonical({"request": {"service": service, "method": method, "params": params}, "response": response})
        fd, tmp = tempfile.mkstemp(dir=p.parent, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(body + "\n")
        os.replace(tmp, p)

    def __len__(self) -> int:
        if self.root is None:
            return len(self._mem)
        return sum(1 for _ in self.root.glob("*/*.json"))


class CallGate:
    """Routes a request through the snapshot according to the run mode.

    live: stored answers are reused, new answers are appended.
    record: always fetch, append new answers.
    replay-strict: stored answers only; a miss raises ReplayMissError.
    """

    def __init__(self, store: SnapshotStore | None = None, mode: str = "live"):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        if mode != "live" and store is None:
            raise ValueError(f"mode {mode} needs a snapshot store")
        self.store = store
        self.mode = mode
        self.network_calls = 0

    def call(self, service: str, method: str, params: Any, fetch: Callable[[], Any]) -> Any:
        if self.store is not None and self.mode in ("live", "replay-strict"):
            ok, resp = self.store.get(service, method, params)
            if ok:
                return resp
        if self.mode == "replay-strict":
            raise ReplayMissError(f"no snapshot entry for {service}.{method} {canonical(params)}")
        self.network_calls += 1
        resp = fetch()
        if self.store is not None:
            self.store.put(service, method, params, resp)
        return resp
