"""Structured simulation of GHZ-diagonal states.

Before the final Hadamard layer every protocol state has the form

    sum_x a[x] |x>|x>...|x>      (r registers of p qubits)

so the 2**p coefficients ``a`` describe it completely.  Measuring after
``H^p`` on every register reduces to a Walsh-Hadamard transform of ``a``:
the XOR of the r outcomes is distributed as ``|wht(a)[z]|**2`` and,
given that XOR, the individual outcomes are uniform over the
``2**((r-1)p)`` tuples consistent with it.

:class:`ProductGhzState` stores the same kind of state as one 2-vector per
qubit position.  Phase oracles keep it in product form, which lets the
protocol run at register widths where 2**p amplitudes would not fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..gf2vec import BitVec, DimensionError

__all__ = [
    "DEFAULT_STRUCTURED_CAP",
    "SimulatorCapError",
    "UnnormalizedStateError",
    "GhzDiagonalState",
    "ProductGhzState",
    "ghz_diagonal_init",
    "ghz_product_init",
    "apply_phase_oracle",
    "phase_signs",
    "wht",
    "wht_direct",
    "sample_measurement",
    "sample_measurements",
    "exact_outcome_distribution",
    "bits_to_bitvecs",
]

DEFAULT_STRUCTURED_CAP = 20
NORM_TOL = 1e-9


class SimulatorCapError(ValueError):
    """Requested size exceeds the configured simulator cap."""


class UnnormalizedStateError(ValueError):
    pass


def _is_pow2(k: int) -> bool:
    return k > 0 and k & (k - 1) == 0


def wht(amps: np.ndarray) -> np.ndarray:
    """Normalized fast Walsh-Hadamard transform; returns a new array.

    ``out[z] = 2**(-p/2) * sum_x (-1)**popcount(z & x) * amps[x]``.
    The transform is its own inverse.
    """
    a = np.array(amps, dtype=np.complex128, copy=True)
    size = a.shape[0]
    if a.ndim != 1 or not _is_pow2(size):
        raise ValueError(f"length must be a power of two, got {a.shape}")
    h = 1
    while h < size:
        v = a.reshape(-1, 2, h)
        lo = v[:, 0, :].copy()
        hi = v[:, 1, :]
        v[:, 0, :] += hi
        v[:, 1, :] = lo - hi
        h *= 2
    a *= 2.0 ** (-math.log2(size) / 2)
    return a


def wht_direct(amps: np.ndarray) -> np.ndarray:
    """O(4**p) reference transform by explicit summation."""
    amps = np.asarray(amps, dtype=np.complex128)
    size = amps.shape[0]
    if not _is_pow2(size):
        raise ValueError(f"length must be a power of two, got {size}")
    idx = np.arange(size)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx[:, None] & idx[None, :]) & 1).astype(np.float64)
    return (signs @ amps) / math.sqrt(size)


def phase_signs(v: BitVec) -> np.ndarray:
    """``(-1)**dot(v, x)`` for every ``x`` in ``[0, 2**v.len)``."""
    signs = np.ones(1)
    for k in range(v.len):
        signs = np.concatenate([signs, -signs if v[k] else signs])
    return signs


def bits_to_bitvecs(bits: np.ndarray) -> list[BitVec]:
    """Convert a ``(..., p)`` little-endian bit array's last axis into BitVecs."""
    flat = bits.reshape(-1, bits.shape[-1])
    return [BitVec.from_bits(row) for row in flat]


def _ints_to_bits(values: np.ndarray, p: int) -> np.ndarray:
    return ((values[..., None] >> np.arange(p, dtype=values.dtype)) & 1).astype(np.uint8)


@dataclass
class GhzDiagonalState:
    """``amps[x]`` multiplies ``|x>`` repeated over all ``r`` registers."""

    p: int
    r: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.amps.shape != (1 << self.p,):
            raise DimensionError(f"expected {1 << self.p} amplitudes, got {self.amps.shape}")
        if self.r < 2:
            raise ValueError("need at least two registers")

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def copy(self) -> GhzDiagonalState:
        return GhzDiagonalState(self.p, self.r, self.amps.copy())

    def apply_phase(self, v: BitVec) -> GhzDiagonalState:
        if v.len != self.p:
            raise DimensionError(f"oracle mask has {v.len} bits, state has p={self.p}")
        return GhzDiagonalState(self.p, self.r, self.amps * phase_signs(v))

    def xor_distribution(self) -> np.ndarray:
        """Probability that the XOR of all outcomes equals ``z``, indexed by ``z``."""
        probs = np.abs(wht(self.amps)) ** 2
        return probs / probs.sum()

    def sample_xor(self, rng: np.random.Generator, shots: int) -> np.ndarray:
        z = rng.choice(1 << self.p, size=shots, p=self.xor_distribution())
        return _ints_to_bits(z.astype(np.int64), self.p)

    def to_amps(self) -> np.ndarray:
        return self.amps.copy()


@dataclass
class ProductGhzState:
    """GHZ-diagonal state whose coefficients factor over qubit positions:
    ``a[x] = prod_k factors[k, x_k]``."""

    p: int
    r: int
    factors: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.factors.shape != (self.p, 2):
            raise DimensionError(f"expected factors of shape ({self.p}, 2), got {self.factors.shape}")
        if self.r < 2:
            raise ValueError("need at least two registers")

    def norm(self) -> float:
        return float(np.prod(np.sum(np.abs(self.factors) ** 2, axis=1)))

    def copy(self) -> ProductGhzState:
        return ProductGhzState(self.p, self.r, self.factors.copy())

    def apply_phase(self, v: BitVec) -> ProductGhzState:
        if v.len != self.p:
            raise DimensionError(f"oracle mask has {v.len} bits, state has p={self.p}")
        f = self.factors.copy()
        f[:, 1] *= 1 - 2 * v.to_bits().astype(np.float64)
        return ProductGhzState(self.p, self.r, f)

    def xor_bit_probabilities(self) -> np.ndarray:
        """Per position, probability that the XOR of outcomes has a 1 there."""
        hat = np.stack([wht(f) for f in self.factors])
        probs = np.abs(hat) ** 2
        return probs[:, 1] / probs.sum(axis=1)

    def xor_distribution(self) -> np.ndarray:
        return self.to_ghz_diagonal().xor_distribution()

    def sample_xor(self, rng: np.random.Generator, shots: int) -> np.ndarray:
        p1 = self.xor_bit_probabilities()
        return (rng.random((shots, self.p)) < p1).astype(np.uint8)

    def to_amps(self, cap: int = DEFAULT_STRUCTURED_CAP) -> np.ndarray:
        if self.p > cap:
            raise SimulatorCapError(f"p={self.p} exceeds cap {cap}")
        amps = np.ones(1, dtype=np.complex128)
        for k in range(self.p):
            amps = np.concatenate([amps * self.factors[k, 0], amps * self.factors[k, 1]])
        return amps

    def to_ghz_diagonal(self, cap: int = DEFAULT_STRUCTURED_CAP) -> GhzDiagonalState:
        return GhzDiagonalState(self.p, self.r, self.to_amps(cap))


State = GhzDiagonalState | ProductGhzState


def _check_init(p: int, r: int) -> None:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if r < 2:
        raise ValueError(f"r must be >= 2, got {r}")


def ghz_diagonal_init(p: int, r: int, cap: int = DEFAULT_STRUCTURED_CAP) -> GhzDiagonalState:
    """p independent GHZ_r tuples: every amplitude equal to ``2**(-p/2)``."""
    _check_init(p, r)
    if p > cap:
        raise SimulatorCapError(f"p={p} exceeds structured cap {cap}")
    amps = np.full(1 << p, 2.0 ** (-p / 2), dtype=np.complex128)
    return GhzDiagonalState(p, r, amps)


def ghz_product_init(p: int, r: int) -> ProductGhzState:
    _check_init(p, r)
    return ProductGhzState(p, r, np.full((p, 2), 1 / math.sqrt(2), dtype=np.complex128))


def apply_phase_oracle(state: State, v: BitVec) -> State:
    """Multiply each coefficient by ``(-1)**dot(v, x)``."""
    return state.apply_phase(v)


def sample_measurements(
    state: State,
    rng: np.random.Generator,
    shots: int,
    order: Sequence[int] | None = None,
) -> np.ndarray:
    """``H^p`` on every register, then measure; returns bits of shape ``(shots, r, p)``.

    The XOR ``z`` of the outcomes is drawn from the transformed state.  Registers
    are then filled in ``order``: all but the last uniformly at random, the last
    so that the XOR equals ``z``.
    """
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise UnnormalizedStateError(f"state norm {state.norm():.3e} != 1")
    order = list(range(state.r)) if order is None else list(order)
    if sorted(order) != list(range(state.r)):
        raise ValueError(f"order must be a permutation of 0..{state.r - 1}")
    z = state.sample_xor(rng, shots)
    free = rng.integers(0, 2, size=(shots, state.r - 1, state.p), dtype=np.uint8)
    out = np.empty((shots, state.r, state.p), dtype=np.uint8)
    out[:, order[:-1], :] = free
    out[:, order[-1], :] = z ^ np.bitwise_xor.reduce(free, axis=1)
    return out


def sample_measurement(
    state: State, rng: np.random.Generator, order: Sequence[int] | None = None
) -> list[BitVec]:
    """One joint measurement; element ``j`` is register ``j``'s outcome."""
    return bits_to_bitvecs(sample_measurements(state, rng, 1, order)[0])


def exact_outcome_distribution(state: State, max_qubits: int = 20) -> np.ndarray:
    """Exact joint distribution over all ``r`` registers.

    Indexed by ``sum_j y_j << (j * p)``.  Built by enumeration, so limited to
    ``r * p <= max_qubits``.
    """
    total = state.r * state.p
    if total > max_qubits:
        raise SimulatorCapError(f"r*p={total} exceeds {max_qubits}")
    zdist = state.xor_distribution()
    idx = np.arange(1 << total, dtype=np.int64)
    mask = (1 << state.p) - 1
    z = np.zeros_like(idx)
    for j in range(state.r):
        z ^= (idx >> (j * state.p)) & mask
    return zdist[z] / float(1 << ((state.r - 1) * state.p))
