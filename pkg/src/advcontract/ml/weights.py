"""ACWT: a little-endian binary container for named arrays.

    magic    4 bytes  b"ACWT"
    version  u32
    count    u32
    per array, sorted by name:
        name_len u16, name (utf-8)
        dtype    u8   (1 = float32, 2 = float64, 3 = int64)
        ndim     u8
        shape    u64 * ndim
        data     row-major, little-endian
"""

from __future__ import annotations

import io
import struct

import numpy as np

MAGIC = b"ACWT"
VERSION = 1
_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("<i8")}
_KIND = {np.dtype("float32"): 1, np.dtype("float64"): 2, np.dtype("int64"): 3}


def _code(a: np.ndarray) -> int:
    dt = a.dtype.newbyteorder("=")
    if dt in _KIND:
        return _KIND[dt]
    if np.issubdtype(dt, np.integer) or dt == np.bool_:
        return 3
    raise ValueError(f"unsupported dtype {a.dtype}")


def dumps(arrays: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC + struct.pack("<II", VERSION, len(arrays)))
    for name in sorted(arrays):
        a = np.asarray(arrays[name])
        code = _code(a)
        raw = name.encode()
        buf.write(struct.pack("<H", len(raw)) + raw + struct.pack("<BB", code, a.ndim))
        buf.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        buf.write(np.ascontiguousarray(a, dtype=_CODES[code]).tobytes())
    return buf.getvalue()


def loads(blob: bytes) -> dict[str, np.ndarray]:
    if blob[:4] != MAGIC:
        raise ValueError("not an ACWT weight file")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported ACWT version {version}")
    pos = 12
    out = {}
    for _ in range(count):
        (n,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        name = blob[pos : pos + n].decode()
        pos += n
        code, ndim = struct.unpack_from("<BB", blob, pos)
        pos += 2
        shape = struct.unpack_from(f"<{ndim}Q", blob, pos)
        pos += 8 * ndim
        dt = _CODES[code]
        size = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        out[name] = np.frombuffer(blob[pos : pos + size], dtype=dt).reshape(shape).astype(dt.newbyteorder("="))
        pos += size
    if pos != len(blob):
        raise ValueError("trailing bytes in ACWT weight file")
    return out
