"""Permutations of {0..n-1} and the per-segment block shuffle."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .gf2vec import BitVec, DimensionError
from .layout import AggregatedVector, blocks, from_blocks, segments

__all__ = [
    "Permutation",
    "ShuffleError",
    "random_permutation",
    "shuffle_aggregated",
    "unshuffle_aggregated",
    "is_block_permutation",
    "find_witnesses",
]


class ShuffleError(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``{0, ..., n-1}``; ``map[k]`` is the image of ``k``."""

    map: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "map", tuple(int(k) for k in self.map))
        if not self.map or sorted(self.map) != list(range(len(self.map))):
            raise ShuffleError(f"not a permutation: {self.map}")

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, k: int) -> int:
        return self.map[k]

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for k, v in enumerate(self.map):
            inv[v] = k
        return Permutation(tuple(inv))

    def compose(self, other: Permutation) -> Permutation:
        """``self`` after ``other``."""
        if self.n != other.n:
            raise ShuffleError("degree mismatch")
        return Permutation(tuple(self.map[other.map[k]] for k in range(self.n)))

    def to_json(self) -> list[int]:
        return list(self.map)


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform element of S_n (numpy's Fisher-Yates shuffle)."""
    if n < 1:
        raise ShuffleError("degree must be >= 1")
    return Permutation(tuple(rng.permutation(n)))


def _permute_segment(seg: BitVec, perm: Permutation, dims) -> BitVec:
    src = blocks(seg, dims)
    return from_blocks([src[perm(k)] for k in range(dims.n)])


def shuffle_aggregated(t: AggregatedVector, perms: Sequence[Permutation]) -> AggregatedVector:
    """Shuffled segment ``i`` has block ``k`` equal to original block ``perms[i](k)``.

    Segment order is left alone.
    """
    if t.shuffled:
        raise ShuffleError("aggregated vector is already shuffled")
    n = t.dims.n
    if len(perms) != n or any(p.n != n for p in perms):
        raise ShuffleError(f"need {n} permutations of degree {n}")
    segs = [_permute_segment(s, perms[i], t.dims) for i, s in enumerate(segments(t))]
    return AggregatedVector(t.dims, BitVec.concat(segs), shuffled=True)


def unshuffle_aggregated(tt: AggregatedVector, perms: Sequence[Permutation]) -> AggregatedVector:
    if not tt.shuffled:
        raise ShuffleError("aggregated vector is not shuffled")
    n = tt.dims.n
    if len(perms) != n or any(p.n != n for p in perms):
        raise ShuffleError(f"need {n} permutations of degree {n}")
    segs = [_permute_segment(s, perms[i].inverse(), tt.dims) for i, s in enumerate(segments(tt))]
    return AggregatedVector(tt.dims, BitVec.concat(segs), shuffled=False)


def is_block_permutation(a: AggregatedVector, b: AggregatedVector) -> bool:
    """True iff each segment of ``a`` holds the same multiset of blocks as the
    matching segment of ``b``."""
    if a.dims != b.dims:
        raise DimensionError(f"dims differ: {a.dims} vs {b.dims}")
    for sa, sb in zip(segments(a), segments(b)):
        if Counter(x.value for x in blocks(sa, a.dims)) != Counter(x.value for x in blocks(sb, b.dims)):
            return False
    return True


def find_witnesses(t: AggregatedVector, target: AggregatedVector) -> Iterator[tuple[Permutation, ...]]:
    """Enumerate every tuple in (S_n)^n whose shuffle maps ``t`` onto ``target``.

    Exhaustive, so only practical for tiny ``n``.
    """
    n = t.dims.n
    group = [Permutation(p) for p in itertools.permutations(range(n))]
    for combo in itertools.product(group, repeat=n):
        if shuffle_aggregated(t, combo).bits == target.bits:
            yield combo
