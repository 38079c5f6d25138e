"""Byte-oriented range coder with a 128-bit state.

The encoder keeps ``low`` and ``range`` as Python ints below ``2**128`` and
shifts out a byte whenever ``range`` drops below ``2**120``.  Carries from
``low`` are propagated into the bytes already written.  Frequency totals up
to ``2**62`` keep the per-symbol truncation loss below ``2**-58`` relative.

Termination writes the shortest byte string that the decoder, padding with
zero bytes, reads as a value inside the final interval; trailing zero bytes
are dropped.
"""
from __future__ import annotations

from ..errors import CorruptPayloadError

STATE_BITS = 128
_TOP = 1 << STATE_BITS
_MASK = _TOP - 1
_RENORM = 1 << (STATE_BITS - 8)
MAX_TOTAL = 1 << 63


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = _TOP
        self.out = bytearray()

    def encode(self, cum: int, freq: int, total: int) -> None:
        if not (0 <= cum and 0 < freq and cum + freq <= total <= MAX_TOTAL):
            raise ValueError(f"bad frequency triple ({cum}, {freq}, {total})")
        r = self.range // total
        self.low += r * cum
        self.range = r * freq
        if self.low >= _TOP:
            self._carry()
            self.low &= _MASK
        while self.range < _RENORM:
            self.out.append(self.low >> (STATE_BITS - 8))
            self.low = (self.low << 8) & _MASK
            self.range <<= 8

    def _carry(self) -> None:
        i = len(self.out) - 1
        while self.out[i] == 0xFF:
            self.out[i] = 0
            i -= 1
        self.out[i] += 1

    def finish(self) -> bytes:
        hi = self.low + self.range
        for t in range(1, STATE_BITS // 8 + 1):
            unit = 1 << (STATE_BITS - 8 * t)
            v = -(-self.low // unit) * unit
            if v < hi:
                break
        if v >= _TOP:
            self._carry()
            v &= _MASK
        self.out.extend(v.to_bytes(STATE_BITS // 8, "big")[:t])
        data = bytes(self.out)
        return data.rstrip(b"\x00")


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = STATE_BITS // 8
        self.range = _TOP
        head = data[: self.pos]
        self.code = int.from_bytes(head + b"\x00" * (self.pos - len(head)), "big")
        self._r = 0

    def target(self, total: int) -> int:
        """Cumulative-frequency slot of the next symbol."""
        self._r = self.range // total
        t = self.code // self._r
        if t >= total:
            raise CorruptPayloadError("range decoder desynchronised (target beyond total)")
        return t

    def consume(self, cum: int, freq: int) -> None:
        self.code -= self._r * cum
        self.range = self._r * freq
        if not 0 <= self.code < self.range:
            raise CorruptPayloadError("range decoder desynchronised (code outside interval)")
        while self.range < _RENORM:
            b = self.data[self.pos] if self.pos < len(self.data) else 0
            self.pos += 1
            self.code = (self.code << 8) | b
            self.range <<= 8
