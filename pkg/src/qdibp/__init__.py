"""Simulator and verification suite for anonymous many-to-many secret
exchange among n information brokers over GHZ entanglement."""

import logging

from .gf2vec import BitVec, dot, format_bits, parse, random_bitvec, xor, zero
from .layout import (
    AggregatedVector,
    Dimensions,
    ExtendedSecret,
    aggregate,
    auxiliary_segment,
    block,
    build_extended,
    expected_blocks,
    primary_segment,
    segment,
)
from .shuffle import Permutation, is_block_permutation, random_permutation, shuffle_aggregated

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
