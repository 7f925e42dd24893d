"""Plain statevector simulator used as an oracle for the structured tier.

Qubit ``q`` is bit ``q`` of the basis index (little-endian).  Gate
functions update the state in place and return it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..gf2vec import BitVec, DimensionError
from .structured import SimulatorCapError

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DenseState",
    "dense_init",
    "apply_h",
    "apply_x",
    "apply_cnot",
    "apply_xor_oracle",
    "probabilities",
    "sample_indices",
    "fidelity",
    "register_values",
    "joint_register_distribution",
]

DEFAULT_DENSE_CAP = 24
_INV_SQRT2 = 1 / math.sqrt(2)


@dataclass
class DenseState:
    num_qubits: int
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def copy(self) -> DenseState:
        return DenseState(self.num_qubits, self.amps.copy())

    def _check(self, *qubits: int) -> None:
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"qubit indices collide: {qubits}")


def dense_init(num_qubits: int, cap: int = DEFAULT_DENSE_CAP) -> DenseState:
    """``|0...0>`` on ``num_qubits`` qubits."""
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    if num_qubits > cap:
        raise SimulatorCapError(f"{num_qubits} qubits exceeds dense cap {cap}")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return DenseState(num_qubits, amps)


def _pair_view(state: DenseState, q: int) -> np.ndarray:
    # axis 1 of the view is the value of qubit q
    return state.amps.reshape(-1, 2, 1 << q)


def apply_h(state: DenseState, q: int) -> DenseState:
    state._check(q)
    v = _pair_view(state, q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = (a0 + a1) * _INV_SQRT2
    v[:, 1, :] = (a0 - a1) * _INV_SQRT2
    return state


def apply_x(state: DenseState, q: int) -> DenseState:
    state._check(q)
    v = _pair_view(state, q)
    v[:, [0, 1], :] = v[:, [1, 0], :]
    return state


def _flip_where(state: DenseState, cond: np.ndarray, target: int) -> None:
    """Swap the target-qubit pair for every basis index where ``cond`` holds."""
    idx = np.arange(state.amps.shape[0], dtype=np.int64)
    lo = idx[cond & (((idx >> target) & 1) == 0)]
    hi = lo | (1 << target)
    state.amps[lo], state.amps[hi] = state.amps[hi].copy(), state.amps[lo].copy()


def apply_cnot(state: DenseState, control: int, target: int) -> DenseState:
    state._check(control, target)
    idx = np.arange(state.amps.shape[0], dtype=np.int64)
    _flip_where(state, ((idx >> control) & 1) == 1, target)
    return state


def apply_xor_oracle(
    state: DenseState, mask: BitVec, input_qubits: Sequence[int], target: int
) -> DenseState:
    """``|y>|x> -> |y ^ dot(mask, x)>|x>`` with ``x`` read from ``input_qubits``
    (``input_qubits[k]`` holds bit ``k`` of ``x``)."""
    input_qubits = list(input_qubits)
    if mask.len != len(input_qubits):
        raise DimensionError(f"mask has {mask.len} bits for {len(input_qubits)} input qubits")
    state._check(*input_qubits, target)
    qmask = 0
    for k, q in enumerate(input_qubits):
        if mask[k]:
            qmask |= 1 << q
    idx = np.arange(state.amps.shape[0], dtype=np.int64)
    _flip_where(state, (np.bitwise_count(idx & qmask) & 1) == 1, target)
    return state


def probabilities(state: DenseState) -> np.ndarray:
    probs = np.abs(state.amps) ** 2
    return probs / probs.sum()


def sample_indices(state: DenseState, rng: np.random.Generator, shots: int) -> np.ndarray:
    return rng.choice(state.amps.shape[0], size=shots, p=probabilities(state))


def fidelity(a: DenseState | np.ndarray, b: DenseState | np.ndarray) -> float:
    """``|<a|b>|**2``; insensitive to global phase."""
    va = a.amps if isinstance(a, DenseState) else np.asarray(a)
    vb = b.amps if isinstance(b, DenseState) else np.asarray(b)
    return float(abs(np.vdot(va, vb)) ** 2)


def register_values(indices: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Read the integer held by ``qubits`` (little-endian) out of basis indices."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.zeros_like(indices)
    for k, q in enumerate(qubits):
        out |= ((indices >> q) & 1) << k
    return out


def joint_register_distribution(state: DenseState, registers: Sequence[Sequence[int]]) -> np.ndarray:
    """Marginal distribution of the listed registers.

    Indexed by ``sum_j value_j << offset_j`` where offsets accumulate register
    widths in list order; all other qubits are traced out.
    """
    probs = probabilities(state)
    idx = np.arange(probs.shape[0], dtype=np.int64)
    joint = np.zeros_like(idx)
    offset = 0
    for qubits in registers:
        joint |= register_values(idx, qubits) << offset
        offset += len(qubits)
    return np.bincount(joint, weights=probs, minlength=1 << offset)
