"""Actors, messages, configuration and the replayable trace."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..gf2vec import BitVec, random_bitvec
from ..layout import AggregatedVector, Dimensions
from ..qsim.structured import DEFAULT_STRUCTURED_CAP

__all__ = [
    "ActorId",
    "Message",
    "ProtocolConfig",
    "ProtocolTrace",
    "ProtocolError",
    "ProtocolAbort",
    "PrivacyViolation",
    "ConfigError",
    "TRENT",
    "broker",
]


class ProtocolError(RuntimeError):
    pass


class ProtocolAbort(ProtocolError):
    """A required message never arrived."""


class PrivacyViolation(ProtocolError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ActorId:
    kind: str
    index: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("broker", "trent"):
            raise ValueError(f"unknown actor kind {self.kind!r}")
        if (self.kind == "broker") != (self.index is not None):
            raise ValueError("brokers carry an index, Trent does not")

    def __str__(self) -> str:
        return f"broker{self.index}" if self.kind == "broker" else "trent"

    @property
    def is_broker(self) -> bool:
        return self.kind == "broker"


TRENT = ActorId("trent")


def broker(i: int) -> ActorId:
    return ActorId("broker", i)


@dataclass(frozen=True)
class Message:
    sender: ActorId
    recipient: ActorId
    phase: int
    payload: BitVec
    nonce: int
    segment: int | None = None


def _parse_actor(spec: str | int) -> ActorId:
    if spec == "trent":
        return TRENT
    if isinstance(spec, int):
        return broker(spec)
    if isinstance(spec, str) and spec.startswith("broker"):
        return broker(int(spec[len("broker"):]))
    raise ConfigError(f"cannot read actor {spec!r}")


@dataclass
class ProtocolConfig:
    """Inputs of one protocol run.

    Explicit ``secrets`` take precedence over ``secret_seed``.  ``drop`` lists
    ``(sender, recipient, phase)`` channel edges that silently lose their
    messages (fault injection).
    """

    n: int
    m: int
    seed: int
    secrets: list[BitVec] | None = None
    secret_seed: int | None = None
    debug_permutations: bool = False
    dealer: str | int = "trent"
    structured_cap: int = DEFAULT_STRUCTURED_CAP
    drop: frozenset[tuple[str, str, int]] = frozenset()

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"the protocol needs n >= 2 brokers, got {self.n}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.secrets is not None:
            if len(self.secrets) != self.n:
                raise ConfigError(f"expected {self.n} secrets, got {len(self.secrets)}")
            if any(s.len != self.m for s in self.secrets):
                raise ConfigError(f"every secret must have {self.m} bits")
        elif self.secret_seed is None:
            raise ConfigError("give either secrets or a secret seed")
        actor = _parse_actor(self.dealer)
        if actor.is_broker and not 0 <= actor.index < self.n:
            raise ConfigError(f"dealer {self.dealer!r} is not a participant")

    @property
    def dims(self) -> Dimensions:
        return Dimensions(self.n, self.m)

    @property
    def dealer_id(self) -> ActorId:
        return _parse_actor(self.dealer)

    def resolved_secrets(self) -> list[BitVec]:
        if self.secrets is not None:
            return list(self.secrets)
        rng = np.random.default_rng(self.secret_seed)
        return [random_bitvec(self.m, rng) for _ in range(self.n)]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "secrets_hex": [s.to_hex() for s in self.resolved_secrets()],
            "seed": self.seed,
            "debug_permutations": self.debug_permutations,
        }

    @classmethod
    def from_json(cls, obj: dict, **overrides: Any) -> ProtocolConfig:
        m = obj["m"]
        secrets = [BitVec.from_hex(h, m) for h in obj["secrets_hex"]]
        kwargs = dict(
            n=obj["n"],
            m=m,
            seed=obj["seed"],
            secrets=secrets,
            debug_permutations=bool(obj.get("debug_permutations", False)),
        )
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass
class ProtocolTrace:
    """Everything observable about one run, in delivery order."""

    config: ProtocolConfig
    secrets: list[BitVec]
    events: list[dict] = field(default_factory=list)
    measurements: dict[int, list[BitVec]] = field(default_factory=dict)
    t: AggregatedVector | None = None
    shuffled: AggregatedVector | None = None
    permutations: list[list[int]] | None = None
    recovered: dict[int, list[BitVec]] = field(default_factory=dict)
    decoded_blocks: dict[int, list[BitVec]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(
        self,
        event: str,
        actor: ActorId | str | None,
        phase: int | None = None,
        payload: BitVec | None = None,
        nonce: int | None = None,
        **extra: Any,
    ) -> dict:
        entry = {
            "event": event,
            "actor": str(actor) if actor is not None else None,
            "phase": phase,
            "payload_hex": payload.to_hex() if payload is not None else None,
            "nonce": nonce,
        }
        entry.update(extra)
        with self._lock:
            self.events.append(entry)
        return entry

    def warn(self, text: str, **extra: Any) -> None:
        self.warnings.append(text)
        self.record("warning", None, detail=text, **extra)

    def messages(self, phase: int | None = None) -> list[dict]:
        return [e for e in self.events if e["event"] == "send" and (phase is None or e["phase"] == phase)]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"event": "config", **self.config.to_json()}, sort_keys=True)]
        lines += [json.dumps(e, sort_keys=True) for e in self.events]
        return "\n".join(lines) + "\n"

    def observed_by(self, actor: ActorId) -> list[dict]:
        """Events the given actor produced or received."""
        name = str(actor)
        return [e for e in self.events if e.get("actor") == name or e.get("to") == name]
