from __future__ import annotations

from Crypto.Hash import keccak


def keccak256(data: bytes) -> bytes:
    """Ethereum Keccak-256 (the pre-standard padding, not NIST SHA3-256)."""
    h = keccak.new(digest_bits=256)
    h.update(data)
    return h.digest()


def selector_of(signature: str) -> bytes:
    return keccak256(signature.encode())[:4]


def signature_matches(signature: str, selector: bytes) -> bool:
    return selector_of(signature) == selector
