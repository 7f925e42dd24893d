"""Fixed-length bit vectors over GF(2).

Bits are packed into a single Python int: position 0 is the least
significant bit and sits rightmost when formatted, so ``"011 100 100"``
has bit 8 = 0 and bit 2 = 1.  Length is part of the value; combining
vectors of different lengths raises instead of zero-extending.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BitVec",
    "BitVecError",
    "DimensionError",
    "ParseError",
    "zero",
    "xor",
    "dot",
    "parse",
    "format_bits",
    "random_bitvec",
]


class BitVecError(ValueError):
    """Invalid length or malformed bit vector."""


class DimensionError(BitVecError):
    """Operands have different lengths."""


class ParseError(BitVecError):
    """Text could not be read as a bit vector."""


@dataclass(frozen=True, slots=True)
class BitVec:
    len: int
    value: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.len, (int, np.integer)) or self.len < 1:
            raise BitVecError(f"bit vector length must be >= 1, got {self.len!r}")
        if self.value < 0 or self.value >> self.len:
            raise BitVecError(f"value {self.value:#x} does not fit in {self.len} bits")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitVec:
        """Build from a little-endian sequence (``bits[0]`` is position 0)."""
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise BitVecError("bits must be 0 or 1")
        value = 0
        for k, b in enumerate(bits):
            value |= b << k
        return cls(len(bits), value)

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitVec:
        try:
            value = int(text, 16) if text else 0
        except ValueError as exc:
            raise ParseError(f"bad hex string {text!r}") from exc
        return cls(length, value)

    @classmethod
    def concat(cls, parts: Sequence[BitVec]) -> BitVec:
        """Concatenate with ``parts[0]`` occupying the lowest positions."""
        if not parts:
            raise BitVecError("nothing to concatenate")
        value, offset = 0, 0
        for part in parts:
            value |= part.value << offset
            offset += part.len
        return cls(offset, value)

    # -- access -------------------------------------------------------------

    def __getitem__(self, k: int) -> int:
        if not 0 <= k < self.len:
            raise IndexError(f"bit {k} out of range for length {self.len}")
        return (self.value >> k) & 1

    def __len__(self) -> int:
        return self.len

    def __iter__(self):
        return (self[k] for k in range(self.len))

    def slice(self, start: int, width: int) -> BitVec:
        """Bits ``[start, start + width)`` as a new vector."""
        if width < 1 or start < 0 or start + width > self.len:
            raise IndexError(f"slice [{start}, {start + width}) outside length {self.len}")
        return BitVec(width, (self.value >> start) & ((1 << width) - 1))

    def to_bits(self) -> np.ndarray:
        return np.array([(self.value >> k) & 1 for k in range(self.len)], dtype=np.uint8)

    def to_hex(self) -> str:
        digits = (self.len + 3) // 4
        return format(self.value, f"0{digits}x")

    def popcount(self) -> int:
        return self.value.bit_count()

    def is_zero(self) -> bool:
        return self.value == 0

    # -- algebra --------------------------------------------------------------

    def __xor__(self, other: BitVec) -> BitVec:
        return xor(self, other)

    def dot(self, other: BitVec) -> int:
        return dot(self, other)

    def __str__(self) -> str:
        return format_bits(self)

    def __repr__(self) -> str:
        return f"BitVec({format_bits(self)!r})"


def _check_len(length: int) -> None:
    if not isinstance(length, (int, np.integer)) or length < 1:
        raise BitVecError(f"bit vector length must be >= 1, got {length!r}")


def _same_len(a: BitVec, b: BitVec) -> None:
    if a.len != b.len:
        raise DimensionError(f"length mismatch: {a.len} vs {b.len}")


def zero(length: int) -> BitVec:
    _check_len(length)
    return BitVec(length, 0)


def xor(a: BitVec, b: BitVec) -> BitVec:
    _same_len(a, b)
    return BitVec(a.len, a.value ^ b.value)


def dot(a: BitVec, b: BitVec) -> int:
    """Inner product mod 2: parity of the bitwise AND."""
    _same_len(a, b)
    return (a.value & b.value).bit_count() & 1


def parse(text: str, length: int) -> BitVec:
    """Read an MSB-left binary string; spaces and ``_`` separators are ignored."""
    _check_len(length)
    digits = "".join(ch for ch in text if not ch.isspace() and ch != "_")
    bad = set(digits) - {"0", "1"}
    if bad:
        raise ParseError(f"unexpected characters {sorted(bad)} in {text!r}")
    if len(digits) != length:
        raise ParseError(f"expected {length} bits, got {len(digits)} in {text!r}")
    return BitVec(length, int(digits, 2))


def format_bits(v: BitVec, group: int | None = None) -> str:
    """MSB-left binary text; with ``group`` a space separates every ``group`` bits
    counted from the right."""
    s = format(v.value, f"0{v.len}b")
    if not group:
        return s
    if group < 1:
        raise BitVecError("group must be positive")
    chunks = []
    end = len(s)
    while end > 0:
        chunks.append(s[max(0, end - group):end])
        end -= group
    return " ".join(reversed(chunks))


def random_bitvec(length: int, rng: np.random.Generator) -> BitVec:
    """Uniform random vector; deterministic for a given generator state."""
    _check_len(length)
    bits = rng.integers(0, 2, size=length, dtype=np.uint8)
    return BitVec.from_bits(bits)
