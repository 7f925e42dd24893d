"""Brokers, Trent, the dealer role and the shared entangled resource."""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from ..gf2vec import BitVec
from ..layout import AggregatedVector, Dimensions, ExtendedSecret, blocks, build_extended, segment
from ..qsim.structured import (
    DEFAULT_STRUCTURED_CAP,
    GhzDiagonalState,
    ProductGhzState,
    ghz_diagonal_init,
    ghz_product_init,
    sample_measurement,
)
from ..shuffle import Permutation, random_permutation, shuffle_aggregated
from .channel import Endpoint
from .model import TRENT, ActorId, ProtocolAbort, ProtocolError, ProtocolTrace, broker

__all__ = ["EntangledResource", "Dealer", "Broker", "Trent", "dealer_distribute"]


def _register_of(actor: ActorId, n: int) -> int:
    return actor.index if actor.is_broker else n


class EntangledResource:
    """p GHZ_{n+1} tuples shared by all participants for one phase.

    Oracles may only be applied before the first measurement.  The joint
    outcome is drawn once, with registers assigned in ``order`` (the last one
    listed is the one fixed by the XOR constraint).
    """

    def __init__(
        self,
        phase: int,
        dims: Dimensions,
        state: GhzDiagonalState | ProductGhzState,
        rng: np.random.Generator,
        order: Sequence[int],
        trace: ProtocolTrace,
    ):
        self.phase = phase
        self.dims = dims
        self.state = state
        self._rng = rng
        self._order = list(order)
        self._trace = trace
        self._outcome: list[BitVec] | None = None

    def apply_oracle(self, actor: ActorId, v: BitVec) -> None:
        if self._outcome is not None:
            raise ProtocolError("cannot apply an oracle after measurement")
        self.state = self.state.apply_phase(v)
        self._trace.record("oracle", actor, self.phase)

    def measure(self, actor: ActorId) -> BitVec:
        if self._outcome is None:
            self._outcome = sample_measurement(self.state, self._rng, self._order)
        y = self._outcome[_register_of(actor, self.dims.n)]
        self._trace.record("measure", actor, self.phase, y)
        return y

    @property
    def outcomes(self) -> list[BitVec]:
        if self._outcome is None:
            raise ProtocolError("resource not measured yet")
        return list(self._outcome)


def dealer_distribute(dims: Dimensions, cap: int = DEFAULT_STRUCTURED_CAP) -> GhzDiagonalState | ProductGhzState:
    """Fresh state of ``p = n*n*m`` GHZ_{n+1} tuples, one per qubit position.

    Uses the 2**p amplitude form up to ``cap`` and the per-position product
    form beyond it.
    """
    p, r = dims.p, dims.n + 1
    if p <= cap:
        return ghz_diagonal_init(p, r, cap)
    return ghz_product_init(p, r)


class Dealer:
    """Prepares a fresh entangled resource for each quantum phase."""

    def __init__(self, actor: ActorId, dims: Dimensions, trace: ProtocolTrace, structured_cap: int):
        self.actor = actor
        self.dims = dims
        self._trace = trace
        self._cap = structured_cap
        self.tuples_distributed = 0

    def distribute(self, phase: int, rng: np.random.Generator, order: Sequence[int]) -> EntangledResource:
        state = dealer_distribute(self.dims, self._cap)
        form = "diagonal" if isinstance(state, GhzDiagonalState) else "product"
        self.tuples_distributed += state.p
        self._trace.record("distribute", self.actor, phase, p=state.p, r=state.r, form=form)
        return EntangledResource(phase, self.dims, state, rng, order, self._trace)


class Broker:
    def __init__(self, index: int, secret: BitVec, dims: Dimensions, endpoint: Endpoint, trace: ProtocolTrace):
        self.index = index
        self.id = broker(index)
        self.secret = secret
        self.dims = dims
        self._ep = endpoint
        self._trace = trace
        self.y: dict[int, BitVec] = {}

    def encode(self) -> ExtendedSecret:
        return build_extended(self.index, self.secret, self.dims)

    def apply_phase1_oracle(self, resource: EntangledResource) -> None:
        resource.apply_oracle(self.id, self.encode().bits)

    def measure(self, resource: EntangledResource) -> BitVec:
        self.y[resource.phase] = resource.measure(self.id)
        return self.y[resource.phase]

    def send_phase1(self) -> None:
        self._ep.send(TRENT, 1, self.y[1])

    def send_phase3(self) -> None:
        # segment j goes to broker j; our own segment stays here
        for j in range(self.dims.n):
            if j != self.index:
                self._ep.send(broker(j), 3, segment(self.y[3], j, self.dims), segment=j)

    def collect_phase3(self) -> BitVec:
        """XOR of the ``index``-th segment from every participant."""
        msgs = self._ep.receive(3)
        got = {m.sender: m for m in msgs}
        expected = [broker(j) for j in range(self.dims.n) if j != self.index] + [TRENT]
        for sender in expected:
            if sender not in got:
                raise ProtocolAbort(f"phase 3: missing segment from {sender} to {self.id}")
        parts = [got[s].payload for s in expected] + [segment(self.y[3], self.index, self.dims)]
        return reduce(lambda a, b: a ^ b, parts)

    def decode(self, shuffled_segment: BitVec) -> tuple[list[BitVec], list[BitVec]]:
        """Return ``(all decoded blocks, blocks with one copy of our secret removed)``."""
        decoded = [b ^ self.secret for b in blocks(shuffled_segment, self.dims)]
        own = sum(1 for b in decoded if b == self.secret)
        if own == 0:
            raise ProtocolError(f"{self.id}: own secret missing from decoded segment")
        if own > 1:
            self._trace.warn(
                f"{self.id}: own secret decoded {own} times; dropped the first occurrence",
                phase=3,
            )
        recovered = list(decoded)
        recovered.remove(self.secret)
        return decoded, recovered


class Trent:
    def __init__(
        self,
        dims: Dimensions,
        endpoint: Endpoint,
        rng: np.random.Generator,
        trace: ProtocolTrace,
        debug_permutations: bool = False,
    ):
        self.id = TRENT
        self.dims = dims
        self._ep = endpoint
        self._rng = rng
        self._trace = trace
        self._debug = debug_permutations
        self.y: dict[int, BitVec] = {}
        self._perms: list[Permutation] | None = None

    def measure(self, resource: EntangledResource) -> BitVec:
        self.y[resource.phase] = resource.measure(self.id)
        return self.y[resource.phase]

    def aggregate(self) -> AggregatedVector:
        msgs = {m.sender: m for m in self._ep.receive(1)}
        for i in range(self.dims.n):
            if broker(i) not in msgs:
                raise ProtocolAbort(f"phase 1: missing register from {broker(i)} to {self.id}")
        parts = [self.y[1]] + [msgs[broker(i)].payload for i in range(self.dims.n)]
        t = AggregatedVector(self.dims, reduce(lambda a, b: a ^ b, parts))
        self._trace.record("aggregate", self.id, 1, t.bits)
        return t

    def shuffle(self, t: AggregatedVector) -> AggregatedVector:
        self._perms = [random_permutation(self.dims.n, self._rng) for _ in range(self.dims.n)]
        tt = shuffle_aggregated(t, self._perms)
        extra = {"permutations": [p.to_json() for p in self._perms]} if self._debug else {}
        self._trace.record("shuffle", self.id, 2, tt.bits, **extra)
        return tt

    def debug_permutations(self) -> list[Permutation] | None:
        return list(self._perms) if self._debug and self._perms is not None else None

    def apply_phase3_oracle(self, resource: EntangledResource, tt: AggregatedVector) -> None:
        resource.apply_oracle(self.id, tt.bits)

    def send_phase3(self) -> None:
        for i in range(self.dims.n):
            self._ep.send(broker(i), 3, segment(self.y[3], i, self.dims), segment=i)
