"""Three-phase protocol driver.

Every actor and the scheduler draw from their own generator derived from
the master seed and a fixed label, so a run is a pure function of its
config.  Phases are separated by barriers; inside a phase the order of
oracle application, measurement and message delivery is shuffled by the
scheduler.
"""

from __future__ import annotations

import logging
import zlib
from collections import Counter
from functools import reduce
from typing import Sequence

import numpy as np

from ..gf2vec import BitVec
from ..layout import AggregatedVector, Dimensions, expected_blocks, segment
from ..shuffle import is_block_permutation, random_permutation, shuffle_aggregated
from .actors import Broker, Dealer, Trent, dealer_distribute
from .channel import Channel
from .model import TRENT, ProtocolConfig, ProtocolTrace, broker

__all__ = [
    "derive_rng",
    "check_r6",
    "Session",
    "run_full",
    "phase1",
    "phase2",
    "phase3",
    "dealer_distribute",
    "verify_trace",
    "expected_recovered",
]

log = logging.getLogger(__name__)


def derive_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


def check_r6(secrets: Sequence[BitVec]) -> list[str]:
    """Problems with the 'unique and non-zero' rule; empty if it holds."""
    problems = []
    for i, s in enumerate(secrets):
        if s.is_zero():
            problems.append(f"R6 violated: secret of broker{i} is zero")
    for value, count in Counter(s.value for s in secrets).items():
        if count > 1:
            owners = [f"broker{i}" for i, s in enumerate(secrets) if s.value == value]
            problems.append(f"R6 violated: {', '.join(owners)} share the same secret")
    return problems


def expected_recovered(secrets: Sequence[BitVec], i: int) -> Counter:
    return Counter(s.value for j, s in enumerate(secrets) if j != i)


class Session:
    def __init__(self, config: ProtocolConfig):
        self.config = config
        self.dims: Dimensions = config.dims
        self.secrets = config.resolved_secrets()
        self.trace = ProtocolTrace(config, self.secrets)
        seed = config.seed
        self._sched = derive_rng(seed, "scheduler")
        self._quantum = {ph: derive_rng(seed, f"quantum/phase{ph}") for ph in (1, 3)}
        self.channel = Channel(self.trace, config.drop)
        self.brokers = [
            Broker(i, s, self.dims, self.channel.endpoint(broker(i)), self.trace) for i, s in enumerate(self.secrets)
        ]
        self.trent = Trent(
            self.dims,
            self.channel.endpoint(TRENT),
            derive_rng(seed, "trent"),
            self.trace,
            config.debug_permutations,
        )
        self.dealer = Dealer(config.dealer_id, self.dims, self.trace, config.structured_cap)
        for problem in check_r6(self.secrets):
            log.warning(problem)
            self.trace.warn(problem)

    def _actors_shuffled(self) -> list:
        actors = self.brokers + [self.trent]
        return [actors[k] for k in self._sched.permutation(len(actors))]

    def _resource(self, phase: int):
        measure_order = self._actors_shuffled()
        regs = [a.index if isinstance(a, Broker) else self.dims.n for a in measure_order]
        return self.dealer.distribute(phase, self._quantum[phase], regs), measure_order

    def phase1(self) -> tuple[AggregatedVector, list[BitVec]]:
        resource, measure_order = self._resource(1)
        for k in self._sched.permutation(self.dims.n):
            self.brokers[k].apply_phase1_oracle(resource)
        for actor in measure_order:
            actor.measure(resource)
        for k in self._sched.permutation(self.dims.n):
            self.brokers[k].send_phase1()
        self.channel.deliver_all(self._sched)
        t = self.trent.aggregate()
        ys = resource.outcomes
        self.trace.measurements[1] = ys
        self.trace.t = t
        return t, ys

    def phase2(self, t: AggregatedVector) -> AggregatedVector:
        tt = self.trent.shuffle(t)
        self.trace.shuffled = tt
        perms = self.trent.debug_permutations()
        if perms is not None:
            self.trace.permutations = [p.to_json() for p in perms]
        return tt

    def phase3(self, tt: AggregatedVector) -> dict[int, list[BitVec]]:
        resource, measure_order = self._resource(3)
        self.trent.apply_phase3_oracle(resource, tt)
        for actor in measure_order:
            actor.measure(resource)
        for actor in self._actors_shuffled():
            actor.send_phase3()
        self.channel.deliver_all(self._sched)
        self.trace.measurements[3] = resource.outcomes
        for b in self.brokers:
            seg = b.collect_phase3()
            decoded, recovered = b.decode(seg)
            self.trace.decoded_blocks[b.index] = decoded
            self.trace.recovered[b.index] = recovered
            self.trace.record("recovered", b.id, 3, seg, secrets_hex=[s.to_hex() for s in recovered])
        return dict(self.trace.recovered)

    def run(self) -> ProtocolTrace:
        t, _ = self.phase1()
        tt = self.phase2(t)
        self.phase3(tt)
        return self.trace


def run_full(config: ProtocolConfig) -> ProtocolTrace:
    return Session(config).run()


def _adhoc_config(secrets: Sequence[BitVec], dims: Dimensions, seed: int, **kw) -> ProtocolConfig:
    return ProtocolConfig(n=dims.n, m=dims.m, seed=seed, secrets=list(secrets), **kw)


def phase1(secrets: Sequence[BitVec], dims: Dimensions, seed: int = 0) -> tuple[AggregatedVector, list[BitVec]]:
    """Run phase 1 alone; returns Trent's ``t`` and the measured registers
    ``[y_0, ..., y_{n-1}, y_trent]``."""
    return Session(_adhoc_config(secrets, dims, seed)).phase1()


def phase2(t: AggregatedVector, seed: int = 0) -> AggregatedVector:
    """Trent's private shuffle of ``t`` with fresh uniform permutations."""
    rng = derive_rng(seed, "trent")
    return shuffle_aggregated(t, [random_permutation(t.dims.n, rng) for _ in range(t.dims.n)])


def phase3(
    tt: AggregatedVector, secrets: Sequence[BitVec], dims: Dimensions, seed: int = 0
) -> dict[int, list[BitVec]]:
    """Disseminate an already shuffled vector; returns each broker's recovered secrets."""
    return Session(_adhoc_config(secrets, dims, seed)).phase3(tt)


def verify_trace(trace: ProtocolTrace) -> dict[str, bool]:
    """On-line invariants of a finished run."""
    cfg, dims, secrets = trace.config, trace.config.dims, trace.secrets
    checks: dict[str, bool] = {}
    y1, y3 = trace.measurements.get(1), trace.measurements.get(3)
    checks["t_matches_block_form"] = trace.t is not None and trace.t.bits == expected_blocks(secrets, dims).bits
    checks["phase1_xor_constraint"] = (
        y1 is not None and trace.t is not None and reduce(lambda a, b: a ^ b, y1) == trace.t.bits
    )
    checks["phase2_block_permutation"] = (
        trace.t is not None and trace.shuffled is not None and is_block_permutation(trace.t, trace.shuffled)
    )
    checks["phase3_segment_constraint"] = y3 is not None and trace.shuffled is not None and all(
        reduce(lambda a, b: a ^ b, (segment(y, j, dims) for y in y3)) == trace.shuffled.segment(j)
        for j in range(dims.n)
    )
    checks["privacy_boundary"] = not any(
        e["actor"].startswith("broker")
        and e["to"].startswith("broker")
        and e["segment"] == int(e["actor"][len("broker"):])
        for e in trace.messages(3)
    )
    checks["recovered_secrets"] = len(trace.recovered) == cfg.n and all(
        Counter(s.value for s in trace.recovered[i]) == expected_recovered(secrets, i) for i in range(cfg.n)
    )
    return checks
