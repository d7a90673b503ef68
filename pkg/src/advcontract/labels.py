"""Address label database shared by semantic recovery and fund tracing.

File format, one entry per line (``#`` comments allowed)::

    <20-byte hex address>,<label>,<category>

where category is one of Safe, Anonymous, Bridge, Unknown.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Iterable


class FundSourceCategory(str, Enum):
    SAFE = "Safe"
    ANONYMOUS = "Anonymous"
    BRIDGE = "Bridge"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, text: str) -> "FundSourceCategory":
        for c in cls:
            if c.value.lower() == text.strip().lower():
                return c
        raise ValueError(f"unknown fund source category {text!r}")


CATEGORY_ORDER = (
    FundSourceCategory.SAFE,
    FundSourceCategory.ANONYMOUS,
    FundSourceCategory.BRIDGE,
    FundSourceCategory.UNKNOWN,
)


def normalize_address(addr: str | bytes) -> str:
    """Lower-case 0x-prefixed 40-digit hex."""
    if isinstance(addr, (bytes, bytearray)):
        if len(addr) != 20:
            raise ValueError("address must be 20 bytes")
        return "0x" + bytes(addr).hex()
    text = addr.strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if len(text) != 40:
        raise ValueError(f"bad address {addr!r}")
    int(text, 16)
    return "0x" + text


class AddressLabelDB:
    def __init__(self, entries: Iterable[tuple[str | bytes, str, FundSourceCategory | str]] = ()):
        self._map: dict[str, tuple[str, FundSourceCategory]] = {}
        for addr, label, cat in entries:
            self.add(addr, label, cat)

    def add(self, addr: str | bytes, label: str, category: FundSourceCategory | str) -> None:
        key = normalize_address(addr)
        if key in self._map:
            raise ValueError(f"duplicate label entry for {key}")
        if not isinstance(category, FundSourceCategory):
            category = FundSourceCategory.parse(category)
        self._map[key] = (label, category)

    def lookup(self, addr: str | bytes) -> tuple[str, FundSourceCategory] | None:
        try:
            key = normalize_address(addr)
        except ValueError:
            return None
        return self._map.get(key)

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, addr) -> bool:
        return self.lookup(addr) is not None

    def items(self):
        return sorted(self._map.items())

    @classmethod
    def from_text(cls, text: str) -> "AddressLabelDB":
        db = cls()
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise ValueError(f"label db line {n}: expected address,label,category")
            db.add(*parts)
        return db

    @classmethod
    def load(cls, path: str | Path) -> "AddressLabelDB":
        return cls.from_text(Path(path).read_text())

    def dump(self) -> str:
        return "".join(f"{a},{lab},{cat.value}\n" for a, (lab, cat) in self.items())


def label_address(addr: str | bytes, labels: AddressLabelDB) -> tuple[str, FundSourceCategory] | None:
    return labels.lookup(addr)


def default_label_db() -> AddressLabelDB:
    from importlib import resources

    return AddressLabelDB.from_text(resources.files("advcontract.data").joinpath("labels.csv").read_text())
