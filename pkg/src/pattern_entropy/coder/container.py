"""Self-describing byte container around a range-coded payload.

Layout (little-endian)::

    magic "PTRN" | version u8 | flags u8 | n u64 | epsilon f64 | k u64
    | rho0 f64 | rho1 f64 | model digest 8 bytes | payload length u64 | payload

``rho0``/``rho1`` are NaN when the corresponding bin holds no letters.  The
digest is FNV-1a 64 over a canonical text serialisation of the model.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CorruptPayloadError, HeaderMismatchError

MAGIC = b"PTRN"
VERSION = 1
HEADER = struct.Struct("<4sBBQdQdd8sQ")
HEADER_SIZE = HEADER.size

FLAG_TRUNCATED = 0x01  # fewer than n symbols; payload starts with a LEB128 count

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def _canon_float(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def canonical_model(theta: np.ndarray, n: int, epsilon: float, rho0: float, rho1: float) -> bytes:
    parts = [
        "theta=" + ",".join(repr(float(t)) for t in theta),
        f"n={int(n)}",
        f"epsilon={_canon_float(epsilon)}",
        f"rho0={_canon_float(rho0)}",
        f"rho1={_canon_float(rho1)}",
    ]
    return ";".join(parts).encode("ascii")


def model_digest(theta: np.ndarray, n: int, epsilon: float, rho0: float, rho1: float) -> bytes:
    return fnv1a_64(canonical_model(theta, n, epsilon, rho0, rho1)).to_bytes(8, "little")


@dataclass(frozen=True)
class Header:
    flags: int
    n: int
    epsilon: float
    k: int
    rho0: float
    rho1: float
    digest: bytes
    payload_len: int

    @property
    def truncated(self) -> bool:
        return bool(self.flags & FLAG_TRUNCATED)


def pack(header: Header, payload: bytes) -> bytes:
    if header.payload_len != len(payload):
        raise ValueError("payload length does not match header")
    head = HEADER.pack(
        MAGIC,
        VERSION,
        header.flags,
        header.n,
        header.epsilon,
        header.k,
        header.rho0,
        header.rho1,
        header.digest,
        header.payload_len,
    )
    return head + payload


def unpack(blob: bytes) -> tuple[Header, bytes]:
    if len(blob) < HEADER_SIZE:
        raise CorruptPayloadError(f"container shorter than its {HEADER_SIZE}-byte header")
    magic, version, flags, n, eps, k, rho0, rho1, digest, plen = HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptPayloadError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptPayloadError(f"unsupported container version {version}")
    payload = blob[HEADER_SIZE:]
    if len(payload) != plen:
        raise CorruptPayloadError(f"payload is {len(payload)} bytes, header says {plen}")
    return Header(flags, n, eps, k, rho0, rho1, digest, plen), payload


def check_header(h: Header, expected: Header) -> None:
    """Raise ``HeaderMismatchError`` naming the first field that disagrees."""
    for field in ("n", "k"):
        a, b = getattr(h, field), getattr(expected, field)
        if a != b:
            raise HeaderMismatchError(f"container {field}={a}, decoder configured with {b}")
    if struct.pack("<d", h.epsilon) != struct.pack("<d", expected.epsilon):
        raise HeaderMismatchError(
            f"container epsilon={h.epsilon!r}, decoder configured with {expected.epsilon!r}"
        )
    if h.digest != expected.digest:
        raise HeaderMismatchError(
            "model digest mismatch: the decoder's distribution or rho values differ from the encoder's"
        )


def leb128(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def read_leb128(data: bytes) -> tuple[int, int]:
    """``(value, bytes consumed)``."""
    value = shift = 0
    for i, byte in enumerate(data):
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, i + 1
        shift += 7
        if shift > 70:
            break
    raise CorruptPayloadError("malformed symbol-count prefix")
