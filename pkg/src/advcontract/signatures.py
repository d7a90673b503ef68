"""Local selector -> canonical signature database.

File format: ``<4-byte hex>,<canonical signature>`` per line. Entries whose
Keccak selector does not match the declared one are rejected on load.
"""

from __future__ import annotations

import logging
from importlib import resources
from pathlib import Path
from typing import Iterable

from advcontract.hashing import selector_of

log = logging.getLogger(__name__)


def _sel(value: str | bytes) -> bytes:
    if isinstance(value, (bytes, bytearray)):
        if len(value) != 4:
            raise ValueError("selector must be 4 bytes")
        return bytes(value)
    text = value.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    return bytes.fromhex(text.rjust(8, "0"))


class SignatureDB:
    def __init__(self, entries: Iterable[tuple[str | bytes, str]] = ()):
        self._map: dict[bytes, str] = {}
        self.rejected: list[str] = []
        for sel, sig in entries:
            self.add(sel, sig)

    def add(self, selector: str | bytes, signature: str) -> bool:
        sel = _sel(selector)
        signature = signature.strip()
        if selector_of(signature) != sel:
            self.rejected.append(f"0x{sel.hex()},{signature}")
            return False
        self._map.setdefault(sel, signature)
        return True

    @classmethod
    def from_signatures(cls, sigs: Iterable[str]) -> "SignatureDB":
        return cls((selector_of(s.strip()), s.strip()) for s in sigs if s.strip())

    @classmethod
    def from_text(cls, text: str) -> "SignatureDB":
        db = cls()
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sel, _, sig = line.partition(",")
            db.add(sel, sig)
        if db.rejected:
            log.warning("rejected %d signature entries with mismatching selectors", len(db.rejected))
        return db

    @classmethod
    def load(cls, path: str | Path) -> "SignatureDB":
        return cls.from_text(Path(path).read_text())

    def resolve(self, selector: bytes) -> str | None:
        return self._map.get(bytes(selector))

    # mapping-style access so the lifter can take a DB directly
    def get(self, selector: bytes, default=None):
        return self._map.get(bytes(selector), default)

    def __contains__(self, selector) -> bool:
        return bytes(selector) in self._map

    def __len__(self) -> int:
        return len(self._map)

    def dump(self) -> str:
        return "".join(f"0x{k.hex()},{v}\n" for k, v in sorted(self._map.items()))


def _data_lines(name: str) -> list[str]:
    text = resources.files("advcontract.data").joinpath(name).read_text()
    return [ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()]


def default_signature_db() -> SignatureDB:
    """Bundled local DB: every signature in the shipped signature lists."""
    sigs = _data_lines("signatures.txt") + _data_lines("token_signatures.txt") + _data_lines("flashloan_callbacks.txt")
    return SignatureDB.from_signatures(dict.fromkeys(sigs))
