"""Block/segment data model for the brokers' secrets.

A register of ``p = n*n*m`` bits is split into ``n`` segments of ``n*m``
bits, each holding ``n`` blocks of ``m`` bits.  Segments and blocks are
numbered from the right starting at zero, so segment ``j`` covers bit
positions ``[j*n*m, (j+1)*n*m)`` and block ``k`` of a segment covers
``[k*m, (k+1)*m)``.  The same addressing is used for quantum registers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

from .gf2vec import BitVec, DimensionError, zero

__all__ = [
    "Dimensions",
    "ExtendedSecret",
    "AggregatedVector",
    "LayoutError",
    "primary_segment",
    "auxiliary_segment",
    "build_extended",
    "aggregate",
    "expected_blocks",
    "segment",
    "block",
    "segments",
    "blocks",
    "from_blocks",
]


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Dimensions:
    """``n`` brokers exchanging ``m``-bit secrets.

    ``n == 1`` is accepted so the shuffle can be exercised on the trivial
    group; the protocol itself insists on ``n >= 2``.
    """

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise LayoutError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @property
    def p(self) -> int:
        return self.n * self.n * self.m

    @property
    def segment_width(self) -> int:
        return self.n * self.m

    @property
    def block_width(self) -> int:
        return self.m


@dataclass(frozen=True)
class ExtendedSecret:
    dims: Dimensions
    owner: int
    bits: BitVec

    def __post_init__(self) -> None:
        if self.bits.len != self.dims.p:
            raise DimensionError(f"extended secret must have {self.dims.p} bits, got {self.bits.len}")
        _check_index(self.owner, self.dims.n, "owner")

    def to_json(self) -> dict:
        return {"n": self.dims.n, "m": self.dims.m, "owner": self.owner, "bits_hex": self.bits.to_hex()}

    @classmethod
    def from_json(cls, obj: dict) -> ExtendedSecret:
        dims = Dimensions(obj["n"], obj["m"])
        return cls(dims, obj["owner"], BitVec.from_hex(obj["bits_hex"], dims.p))


@dataclass(frozen=True)
class AggregatedVector:
    dims: Dimensions
    bits: BitVec
    shuffled: bool = False

    def __post_init__(self) -> None:
        if self.bits.len != self.dims.p:
            raise DimensionError(f"aggregated vector must have {self.dims.p} bits, got {self.bits.len}")

    def segment(self, j: int) -> BitVec:
        return segment(self.bits, j, self.dims)

    def block(self, i: int, j: int) -> BitVec:
        """Block ``j`` of segment ``i``."""
        return block(self.segment(i), j, self.dims)

    def to_json(self) -> dict:
        return {
            "n": self.dims.n,
            "m": self.dims.m,
            "shuffled": self.shuffled,
            "bits_hex": self.bits.to_hex(),
        }


def _check_index(i: int, n: int, what: str = "index") -> None:
    if not 0 <= i < n:
        raise IndexError(f"{what} {i} out of range [0, {n})")


def _check_secret(s: BitVec, dims: Dimensions) -> None:
    if s.len != dims.m:
        raise DimensionError(f"secret must have {dims.m} bits, got {s.len}")


def from_blocks(blocks_: Sequence[BitVec]) -> BitVec:
    """Join blocks with ``blocks_[0]`` rightmost."""
    return BitVec.concat(blocks_)


def primary_segment(i: int, s: BitVec, dims: Dimensions) -> BitVec:
    """Segment with a zero block at position ``i`` and ``s`` everywhere else."""
    _check_index(i, dims.n, "broker index")
    _check_secret(s, dims)
    z = zero(dims.m)
    return from_blocks([z if k == i else s for k in range(dims.n)])


def auxiliary_segment(i: int, s: BitVec, dims: Dimensions) -> BitVec:
    """Segment with ``s`` at position ``i`` and zero blocks everywhere else."""
    _check_index(i, dims.n, "broker index")
    _check_secret(s, dims)
    z = zero(dims.m)
    return from_blocks([s if k == i else z for k in range(dims.n)])


def build_extended(i: int, s: BitVec, dims: Dimensions) -> ExtendedSecret:
    prim = primary_segment(i, s, dims)
    aux = auxiliary_segment(i, s, dims)
    bits = BitVec.concat([prim if j == i else aux for j in range(dims.n)])
    return ExtendedSecret(dims, i, bits)


def aggregate(extended: Sequence[ExtendedSecret], dims: Dimensions) -> AggregatedVector:
    """XOR of one extended secret per broker."""
    owners = sorted(e.owner for e in extended)
    if owners != list(range(dims.n)):
        raise LayoutError(f"need exactly one extended secret per owner 0..{dims.n - 1}, got owners {owners}")
    for e in extended:
        if e.dims != dims:
            raise DimensionError(f"extended secret of broker {e.owner} has dims {e.dims}, expected {dims}")
    bits = reduce(lambda a, b: a ^ b, (e.bits for e in extended))
    return AggregatedVector(dims, bits, shuffled=False)


def expected_blocks(secrets: Sequence[BitVec], dims: Dimensions) -> AggregatedVector:
    """Aggregated vector built directly from ``b[i][i] = 0`` and
    ``b[i][j] = s_i ^ s_j``.  Independent of :func:`aggregate`; used as its oracle."""
    if len(secrets) != dims.n:
        raise DimensionError(f"expected {dims.n} secrets, got {len(secrets)}")
    for s in secrets:
        _check_secret(s, dims)
    segs = []
    for i in range(dims.n):
        segs.append(from_blocks([zero(dims.m) if j == i else secrets[i] ^ secrets[j] for j in range(dims.n)]))
    return AggregatedVector(dims, BitVec.concat(segs), shuffled=False)


def segment(v: AggregatedVector | BitVec, j: int, dims: Dimensions | None = None) -> BitVec:
    """Segment ``j`` of an aggregated vector or of a ``p``-bit register."""
    if isinstance(v, AggregatedVector):
        dims = dims or v.dims
        v = v.bits
    if dims is None:
        raise LayoutError("dims required when slicing a bare bit vector")
    if v.len != dims.p:
        raise DimensionError(f"register must have {dims.p} bits, got {v.len}")
    _check_index(j, dims.n, "segment index")
    w = dims.segment_width
    return v.slice(j * w, w)


def block(seg: BitVec, k: int, dims: Dimensions) -> BitVec:
    if seg.len != dims.segment_width:
        raise DimensionError(f"segment must have {dims.segment_width} bits, got {seg.len}")
    _check_index(k, dims.n, "block index")
    return seg.slice(k * dims.m, dims.m)


def segments(v: AggregatedVector | BitVec, dims: Dimensions | None = None) -> list[BitVec]:
    d = dims or v.dims  # type: ignore[union-attr]
    return [segment(v, j, d) for j in range(d.n)]


def blocks(seg: BitVec, dims: Dimensions) -> list[BitVec]:
    return [block(seg, k, dims) for k in range(dims.n)]
