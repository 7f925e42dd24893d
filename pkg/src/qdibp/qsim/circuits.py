"""Gate lists for GHZ preparation and the two protocol circuits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..gf2vec import BitVec, DimensionError
from ..layout import AggregatedVector, Dimensions, ExtendedSecret
from .dense import (
    DEFAULT_DENSE_CAP,
    DenseState,
    apply_cnot,
    apply_h,
    apply_x,
    apply_xor_oracle,
    dense_init,
    joint_register_distribution,
)
from .structured import SimulatorCapError

__all__ = [
    "Gate",
    "Circuit",
    "ghz_prep_gates",
    "cnot_depth",
    "run_gates",
    "build_phase1_circuit",
    "build_phase3_circuit",
    "gates_to_json",
    "ghz_reference_amps",
]

GATE_NAMES = ("H", "X", "CNOT", "XOR_ORACLE", "MEASURE")


@dataclass(frozen=True)
class Gate:
    """One circuit step.

    ``XOR_ORACLE`` lists its input qubits followed by the target qubit.
    ``MEASURE`` is a marker for a register read-out and does not change
    the state.
    """

    name: str
    qubits: tuple[int, ...]
    mask: BitVec | None = None

    def __post_init__(self) -> None:
        if self.name not in GATE_NAMES:
            raise ValueError(f"unknown gate {self.name!r}")
        if self.name == "XOR_ORACLE":
            if self.mask is None or self.mask.len != len(self.qubits) - 1:
                raise DimensionError("oracle mask width must match its input register")

    def to_json(self) -> dict:
        return {
            "gate": self.name,
            "qubits": list(self.qubits),
            "mask_hex": self.mask.to_hex() if self.mask is not None else None,
        }

    def remap(self, mapping: Sequence[int]) -> Gate:
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.mask)


def gates_to_json(gates: Sequence[Gate]) -> str:
    return json.dumps([g.to_json() for g in gates])


def ghz_prep_gates(r: int) -> list[Gate]:
    """H on qubit 0, then a doubling CNOT fan-out: layer ``l`` copies qubit
    ``q`` onto ``q + 2**l`` for every ``q < 2**l``."""
    if r < 2:
        raise ValueError("GHZ state needs at least two qubits")
    gates = [Gate("H", (0,))]
    span = 1
    while span < r:
        for q in range(span):
            if q + span < r:
                gates.append(Gate("CNOT", (q, q + span)))
        span *= 2
    return gates


def cnot_depth(gates: Sequence[Gate]) -> int:
    """Number of CNOT layers when each gate is scheduled as early as its qubits allow."""
    ready: dict[int, int] = {}
    depth = 0
    for g in gates:
        if g.name != "CNOT":
            continue
        layer = 1 + max(ready.get(q, 0) for q in g.qubits)
        for q in g.qubits:
            ready[q] = layer
        depth = max(depth, layer)
    return depth


def run_gates(gates: Sequence[Gate], state: DenseState) -> DenseState:
    for g in gates:
        if g.name == "H":
            apply_h(state, g.qubits[0])
        elif g.name == "X":
            apply_x(state, g.qubits[0])
        elif g.name == "CNOT":
            apply_cnot(state, *g.qubits)
        elif g.name == "XOR_ORACLE":
            apply_xor_oracle(state, g.mask, g.qubits[:-1], g.qubits[-1])
    return state


@dataclass
class Circuit:
    """A protocol circuit: register ``j < n`` belongs to broker ``j``,
    register ``n`` to Trent."""

    num_qubits: int
    registers: list[tuple[int, ...]]
    targets: dict[str, int]
    gates: list[Gate] = field(default_factory=list)

    def run(self, cap: int = DEFAULT_DENSE_CAP) -> DenseState:
        return run_gates(self.gates, dense_init(self.num_qubits, cap))

    def register_distribution(self, state: DenseState) -> np.ndarray:
        """Joint outcome distribution indexed by ``sum_j y_j << (j * p)``."""
        return joint_register_distribution(state, self.registers)


def _skeleton(dims: Dimensions, target_owners: Sequence[str], cap: int) -> Circuit:
    p, r = dims.p, dims.n + 1
    num_qubits = r * p + len(target_owners)
    if num_qubits > cap:
        raise SimulatorCapError(f"circuit needs {num_qubits} qubits, dense cap is {cap}")
    registers = [tuple(j * p + k for k in range(p)) for j in range(r)]
    targets = {owner: r * p + t for t, owner in enumerate(target_owners)}
    circ = Circuit(num_qubits, registers, targets)
    prep = ghz_prep_gates(r)
    for k in range(p):
        tuple_qubits = [registers[j][k] for j in range(r)]
        circ.gates.extend(g.remap(tuple_qubits) for g in prep)
    for q in targets.values():
        circ.gates += [Gate("X", (q,)), Gate("H", (q,))]
    return circ


def _finish(circ: Circuit) -> Circuit:
    for reg in circ.registers:
        circ.gates.extend(Gate("H", (q,)) for q in reg)
    for reg in circ.registers:
        circ.gates.append(Gate("MEASURE", reg))
    return circ


def build_phase1_circuit(
    dims: Dimensions, extendeds: Sequence[ExtendedSecret], cap: int = DEFAULT_DENSE_CAP
) -> Circuit:
    """Brokers each own a |-> target and apply the oracle for their extended secret."""
    by_owner = {e.owner: e for e in extendeds}
    if sorted(by_owner) != list(range(dims.n)):
        raise ValueError("need one extended secret per broker")
    circ = _skeleton(dims, [f"broker{i}" for i in range(dims.n)], cap)
    for i in range(dims.n):
        target = circ.targets[f"broker{i}"]
        circ.gates.append(Gate("XOR_ORACLE", circ.registers[i] + (target,), by_owner[i].bits))
    return _finish(circ)


def build_phase3_circuit(
    dims: Dimensions, shuffled: AggregatedVector | BitVec, cap: int = DEFAULT_DENSE_CAP
) -> Circuit:
    """Only Trent holds a target qubit and applies an oracle."""
    bits = shuffled.bits if isinstance(shuffled, AggregatedVector) else shuffled
    if bits.len != dims.p:
        raise DimensionError(f"shuffled vector must have {dims.p} bits")
    circ = _skeleton(dims, ["trent"], cap)
    target = circ.targets["trent"]
    circ.gates.append(Gate("XOR_ORACLE", circ.registers[dims.n] + (target,), bits))
    return _finish(circ)


def ghz_reference_amps(r: int) -> np.ndarray:
    """``(|0...0> + |1...1>) / sqrt(2)`` on ``r`` qubits."""
    amps = np.zeros(1 << r, dtype=np.complex128)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return amps
