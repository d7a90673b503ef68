from __future__ import annotations

from advcontract.hashing import keccak256


def _rlp_bytes(b: bytes) -> bytes:
    if len(b) == 1 and b[0] < 0x80:
        return b
    if len(b) <= 55:
        return bytes([0x80 + len(b)]) + b
    ln = len(b).to_bytes((len(b).bit_length() + 7) // 8, "big")
    return bytes([0xB7 + len(ln)]) + ln + b


def _rlp_list(items: list[bytes]) -> bytes:
    body = b"".join(items)
    if len(body) <= 55:
        return bytes([0xC0 + len(body)]) + body
    ln = len(body).to_bytes((len(body).bit_length() + 7) // 8, "big")
    return bytes([0xF7 + len(ln)]) + ln + body


def contract_address(creator: str | bytes, nonce: int) -> str:
    """Address of a contract created by ``creator`` with transaction nonce ``nonce``."""
    if isinstance(creator, str):
        creator = bytes.fromhex(creator.removeprefix("0x"))
    n = nonce.to_bytes((nonce.bit_length() + 7) // 8, "big") if nonce else b""
    return "0x" + keccak256(_rlp_list([_rlp_bytes(creator), _rlp_bytes(n)]))[12:].hex()
