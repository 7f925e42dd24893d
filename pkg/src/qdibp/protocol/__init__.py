"""Simulated three-phase protocol among n brokers and Trent."""

from .actors import Broker, Dealer, EntangledResource, Trent, dealer_distribute
from .channel import Channel, Endpoint
from .model import (
    TRENT,
    ActorId,
    ConfigError,
    Message,
    PrivacyViolation,
    ProtocolAbort,
    ProtocolConfig,
    ProtocolError,
    ProtocolTrace,
    broker,
)
from .session import (
    Session,
    check_r6,
    derive_rng,
    expected_recovered,
    phase1,
    phase2,
    phase3,
    run_full,
    verify_trace,
)
