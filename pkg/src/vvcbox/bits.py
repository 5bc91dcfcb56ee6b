"""Big-endian bit reader/writer with exp-Golomb support."""
from __future__ import annotations

from .errors import BitstreamUnderflow


class BitReader:
    """Reads a byte string MSB-first. Positions are absolute bit offsets."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0  # bit position

    @property
    def bits_left(self) -> int:
        return len(self.data) * 8 - self.pos

    def byte_aligned(self) -> bool:
        return self.pos % 8 == 0

    def u(self, n: int) -> int:
        """Read n bits as an unsigned integer."""
        if n < 0:
            raise ValueError("bit count must be >= 0")
        if self.pos + n > len(self.data) * 8:
            raise BitstreamUnderflow(f"need {n} bits at bit {self.pos}, have {self.bits_left}")
        val = 0
        pos = self.pos
        for _ in range(n):
            byte = self.data[pos >> 3]
            val = (val << 1) | ((byte >> (7 - (pos & 7))) & 1)
            pos += 1
        self.pos = pos
        return val

    def flag(self) -> bool:
        return self.u(1) == 1

    def ue(self) -> int:
        """Read an unsigned exp-Golomb code: 1 -> 0, 010 -> 1, 00100 -> 3."""
        zeros = 0
        while True:
            bit = self.u(1)
            if bit:
                break
            zeros += 1
            if zeros > 32:
                raise BitstreamUnderflow("exp-Golomb prefix longer than 32 bits")
        if zeros == 0:
            return 0
        return (1 << zeros) - 1 + self.u(zeros)

    def se(self) -> int:
        """Read a signed exp-Golomb code."""
        k = self.ue()
        if k == 0:
            return 0
        sign = 1 if k % 2 else -1
        return sign * ((k + 1) // 2)

    def align(self) -> None:
        """Skip forward to the next byte boundary."""
        self.pos = (self.pos + 7) & ~7


class BitWriter:
    """Accumulates bits MSB-first into a byte string."""

    def __init__(self) -> None:
        self._bytes = bytearray()
        self._cur = 0
        self._nbits = 0

    def u(self, n: int, value: int) -> "BitWriter":
        if value < 0 or value >= (1 << n):
            raise ValueError(f"value {value} does not fit in {n} bits")
        for i in range(n - 1, -1, -1):
            self._cur = (self._cur << 1) | ((value >> i) & 1)
            self._nbits += 1
            if self._nbits == 8:
                self._bytes.append(self._cur)
                self._cur = 0
                self._nbits = 0
        return self

    def flag(self, value: bool) -> "BitWriter":
        return self.u(1, 1 if value else 0)

    def ue(self, value: int) -> "BitWriter":
        if value < 0:
            raise ValueError("ue(v) takes non-negative values")
        code = value + 1
        nbits = code.bit_length()
        self.u(nbits - 1, 0)
        return self.u(nbits, code)

    def align_zero(self) -> "BitWriter":
        while self._nbits != 0:
            self.u(1, 0)
        return self

    def rbsp_trailing(self) -> "BitWriter":
        """Append the stop bit and zero-pad to a byte boundary."""
        self.u(1, 1)
        return self.align_zero()

    @property
    def bit_length(self) -> int:
        return len(self._bytes) * 8 + self._nbits

    def to_bytes(self) -> bytes:
        if self._nbits != 0:
            raise ValueError("bit writer not byte-aligned")
        return bytes(self._bytes)
