import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdibp.gf2vec import BitVec, DimensionError, format_bits, parse, zero
from qdibp.layout import (
    AggregatedVector,
    Dimensions,
    ExtendedSecret,
    LayoutError,
    aggregate,
    auxiliary_segment,
    block,
    blocks,
    build_extended,
    expected_blocks,
    primary_segment,
    segment,
    segments,
)

D31 = Dimensions(3, 1)
ONE, NIL = parse("1", 1), parse("0", 1)
# Charlie, Bob, Alice as brokers 0, 1, 2
EXAMPLE = [ONE, NIL, ONE]


def fmt(v, g=3):
    return format_bits(v, g)


def test_dimensions():
    d = Dimensions(4, 2)
    assert (d.p, d.segment_width, d.block_width) == (32, 8, 2)


def test_primary_segments():
    assert fmt(primary_segment(0, ONE, D31)) == "110"
    assert fmt(primary_segment(2, ONE, D31)) == "011"
    assert fmt(primary_segment(1, NIL, D31)) == "000"


def test_auxiliary_segments():
    assert fmt(auxiliary_segment(0, ONE, D31)) == "001"
    assert fmt(auxiliary_segment(2, ONE, D31)) == "100"
    d = Dimensions(4, 3)
    assert auxiliary_segment(1, zero(3), d) == zero(12)


def test_example_extended():
    got = [fmt(build_extended(i, s, D31).bits) for i, s in enumerate(EXAMPLE)]
    assert got == ["001 001 110", "000 000 000", "011 100 100"]


def test_example_aggregate():
    ext = [build_extended(i, s, D31) for i, s in enumerate(EXAMPLE)]
    assert fmt(aggregate(ext, D31).bits) == "010 101 010"
    assert fmt(expected_blocks(EXAMPLE, D31).bits) == "010 101 010"


def test_example_mapping_is_unique():
    # only one assignment of the three named actors to broker indices matches
    want = {"C": "001 001 110", "B": "000 000 000", "A": "011 100 100"}
    secrets = {"C": ONE, "B": NIL, "A": ONE}
    hits = []
    for order in itertools.permutations("CBA"):
        if all(fmt(build_extended(i, secrets[a], D31).bits) == want[a] for i, a in enumerate(order)):
            hits.append(order)
    assert hits == [("C", "B", "A")]


def test_n2_m2_hand_example():
    d = Dimensions(2, 2)
    t = expected_blocks([parse("01", 2), parse("10", 2)], d)
    assert fmt(segment(t, 1), 2) == "00 11"
    assert fmt(segment(t, 0), 2) == "11 00"
    ext = [build_extended(0, parse("01", 2), d), build_extended(1, parse("10", 2), d)]
    assert aggregate(ext, d).bits == t.bits


def test_degenerate_aggregates():
    d = Dimensions(4, 2)
    assert aggregate([build_extended(i, zero(2), d) for i in range(4)], d).bits == zero(d.p)
    s = parse("11", 2)
    assert expected_blocks([s] * 4, d).bits == zero(d.p)


def test_segment_and_block_examples():
    t = AggregatedVector(D31, parse("010 101 010", 9))
    assert fmt(segment(t, 0)) == "010"
    assert block(parse("110", 3), 0, D31) == NIL
    assert BitVec.concat(segments(t)) == t.bits


def test_oracle_equivalence_exhaustive():
    for n in range(2, 5):
        for m in (1, 2):
            d = Dimensions(n, m)
            vals = [BitVec(m, v) for v in range(1 << m)]
            for secrets in itertools.product(vals, repeat=n):
                t = aggregate([build_extended(i, s, d) for i, s in enumerate(secrets)], d)
                assert t.bits == expected_blocks(list(secrets), d).bits


@st.composite
def configs(draw, max_n=5, max_m=3):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, max_m))
    secrets = [BitVec(m, draw(st.integers(0, (1 << m) - 1))) for _ in range(n)]
    return Dimensions(n, m), secrets


@given(configs())
def test_extended_structure(cfg):
    d, secrets = cfg
    for i, s in enumerate(secrets):
        ext = build_extended(i, s, d)
        for j, seg in enumerate(segments(ext.bits, d)):
            for k, b in enumerate(blocks(seg, d)):
                if j == i:
                    assert b == (zero(d.m) if k == i else s)
                else:
                    assert b == (s if k == i else zero(d.m))
        if not s.is_zero():
            nonzero = sum(not b.is_zero() for seg in segments(ext.bits, d) for b in blocks(seg, d))
            assert nonzero == 2 * (d.n - 1)


@given(configs())
def test_aggregate_block_form(cfg):
    d, secrets = cfg
    t = aggregate([build_extended(i, s, d) for i, s in enumerate(secrets)], d)
    assert t.bits == expected_blocks(secrets, d).bits
    for i in range(d.n):
        assert t.block(i, i) == zero(d.m)
        for j in range(d.n):
            assert t.block(i, j) == secrets[i] ^ secrets[j]
            assert t.block(i, j) == t.block(j, i)


@given(configs(), st.data())
def test_offset_invariance(cfg, data):
    d, secrets = cfg
    c = BitVec(d.m, data.draw(st.integers(0, (1 << d.m) - 1)))
    assert expected_blocks([s ^ c for s in secrets], d).bits == expected_blocks(secrets, d).bits
    shifted = [build_extended(i, s ^ c, d) for i, s in enumerate(secrets)]
    assert aggregate(shifted, d).bits == expected_blocks(secrets, d).bits


def test_extended_json_round_trip():
    ext = build_extended(2, ONE, D31)
    assert ExtendedSecret.from_json(ext.to_json()) == ext


def test_errors():
    with pytest.raises(IndexError):
        primary_segment(3, ONE, D31)
    with pytest.raises(DimensionError):
        primary_segment(0, parse("10", 2), D31)
    ext = [build_extended(i, s, D31) for i, s in enumerate(EXAMPLE)]
    with pytest.raises(LayoutError):
        aggregate(ext[:2], D31)
    with pytest.raises(LayoutError):
        aggregate([ext[0], ext[0], ext[2]], D31)
    with pytest.raises(DimensionError):
        segment(zero(8), 0, D31)
    with pytest.raises(IndexError):
        segment(AggregatedVector(D31, zero(9)), 3)
