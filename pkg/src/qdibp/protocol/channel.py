"""In-process authenticated classical channels.

Actors only get an :class:`Endpoint`, which stamps the sender identity on
every message, so a message cannot claim to come from someone else.
Queued messages are delivered in an order drawn from the scheduler's
generator.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from ..gf2vec import BitVec
from .model import ActorId, Message, PrivacyViolation, ProtocolTrace

__all__ = ["Channel", "Endpoint"]


class Channel:
    def __init__(self, trace: ProtocolTrace, drop: frozenset[tuple[str, str, int]] = frozenset()):
        self._trace = trace
        self._drop = drop
        self._queue: list[Message] = []
        self._inbox: dict[ActorId, list[Message]] = defaultdict(list)
        self._nonce = 0

    def endpoint(self, actor: ActorId) -> Endpoint:
        return Endpoint(self, actor)

    def _submit(self, sender: ActorId, recipient: ActorId, phase: int, payload: BitVec, segment: int | None) -> None:
        if sender == recipient:
            raise ValueError(f"{sender} cannot send to itself")
        if phase == 3 and sender.is_broker and recipient.is_broker and segment == sender.index:
            raise PrivacyViolation(f"{sender} tried to reveal its own segment to {recipient}")
        msg = Message(sender, recipient, phase, payload, self._nonce, segment)
        self._nonce += 1
        self._trace.record("send", sender, phase, payload, msg.nonce, to=str(recipient), segment=segment)
        self._queue.append(msg)

    def deliver_all(self, rng: np.random.Generator) -> None:
        """Flush the queue in a random order."""
        queue, self._queue = self._queue, []
        for k in rng.permutation(len(queue)):
            msg = queue[k]
            if (str(msg.sender), str(msg.recipient), msg.phase) in self._drop:
                self._trace.record("drop", msg.sender, msg.phase, None, msg.nonce, to=str(msg.recipient))
                continue
            self._trace.record(
                "deliver", msg.sender, msg.phase, msg.payload, msg.nonce, to=str(msg.recipient), segment=msg.segment
            )
            self._inbox[msg.recipient].append(msg)

    def take(self, actor: ActorId, phase: int) -> list[Message]:
        box = self._inbox[actor]
        mine = [m for m in box if m.phase == phase]
        self._inbox[actor] = [m for m in box if m.phase != phase]
        return mine


class Endpoint:
    def __init__(self, channel: Channel, actor: ActorId):
        self._channel = channel
        self.actor = actor

    def send(self, recipient: ActorId, phase: int, payload: BitVec, segment: int | None = None) -> None:
        self._channel._submit(self.actor, recipient, phase, payload, segment)

    def receive(self, phase: int) -> list[Message]:
        return self._channel.take(self.actor, phase)
