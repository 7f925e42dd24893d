import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdibp.gf2vec import (
    BitVec,
    BitVecError,
    DimensionError,
    ParseError,
    dot,
    format_bits,
    parse,
    random_bitvec,
    xor,
    zero,
)


@st.composite
def same_len(draw, k=2, max_len=130):
    length = draw(st.integers(1, max_len))
    return [BitVec(length, draw(st.integers(0, (1 << length) - 1))) for _ in range(k)]


def loop_xor(a, b):
    # bit-by-bit reference
    return BitVec.from_bits([a[i] ^ b[i] for i in range(a.len)])


def loop_dot(a, b):
    return sum(a[i] & b[i] for i in range(a.len)) % 2


def test_zero_and_identity():
    assert format_bits(zero(3)) == "000"
    assert xor(zero(4), parse("1011", 4)) == parse("1011", 4)


def test_xor_example_segment():
    assert format_bits(xor(parse("011", 3), parse("001", 3))) == "010"


def test_dot_hand_example():
    assert dot(parse("101", 3), parse("110", 3)) == 1


def test_group_laws_exhaustive():
    for length in range(1, 5):
        vs = [BitVec(length, v) for v in range(1 << length)]
        for a, b in itertools.product(vs, repeat=2):
            assert xor(a, b) == xor(b, a)
            assert xor(a, a) == zero(length)
            assert xor(a, zero(length)) == a
        for a, b, c in itertools.product(vs, repeat=3):
            assert xor(xor(a, b), c) == xor(a, xor(b, c))


@given(same_len(3))
def test_group_laws_random(vs):
    a, b, c = vs
    assert xor(xor(a, b), b) == a
    assert xor(xor(a, b), c) == xor(a, xor(b, c))
    assert xor(a, b) == loop_xor(a, b)


@given(same_len(3))
def test_bilinearity(vs):
    a, b, c = vs
    assert dot(xor(a, b), c) == dot(a, c) ^ dot(b, c)
    assert dot(a, b) == loop_dot(a, b)


@given(same_len(1))
def test_dot_with_zero(vs):
    (x,) = vs
    assert dot(zero(x.len), x) == 0


def test_cip_exhaustive():
    for p in range(1, 13):
        xs = np.arange(1 << p)
        for c in range(1 << p):
            zeros = int(np.count_nonzero((np.bitwise_count(xs & c) & 1) == 0))
            assert zeros == (1 << p if c == 0 else 1 << (p - 1))


def test_cip_against_bitvec_dot():
    p = 6
    for c in range(1 << p):
        cv = BitVec(p, c)
        zeros = sum(1 for x in range(1 << p) if dot(cv, BitVec(p, x)) == 0)
        assert zeros == (1 << p if c == 0 else 1 << (p - 1))


def test_parse_example_vector():
    v = parse("011 100 100", 9)
    assert v[8] == 0 and v[0] == 0 and v[2] == 1
    assert v[7] == 1 and v[6] == 1


def test_format_examples():
    assert format_bits(zero(6), group=3) == "000 000"
    assert format_bits(parse("010 101 010", 9), group=3) == "010 101 010"
    # groups count from the right
    assert format_bits(parse("10110", 5), group=2) == "1 01 10"


@given(same_len(1))
def test_round_trip(vs):
    (v,) = vs
    assert parse(format_bits(v, 3), v.len) == v
    assert parse(format_bits(v), v.len) == v
    assert BitVec.from_hex(v.to_hex(), v.len) == v
    assert BitVec.from_bits(v.to_bits()) == v


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("0120", 4)
    with pytest.raises(ParseError):
        parse("010", 4)
    with pytest.raises(ParseError):
        BitVec.from_hex("zz", 8)


def test_invalid_lengths():
    with pytest.raises(BitVecError):
        zero(0)
    with pytest.raises(BitVecError):
        random_bitvec(0, np.random.default_rng(0))
    with pytest.raises(BitVecError):
        BitVec(2, 4)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        xor(zero(3), zero(4))
    with pytest.raises(DimensionError):
        dot(zero(3), zero(4))


def test_random_determinism():
    a = random_bitvec(8, np.random.default_rng(42))
    b = random_bitvec(8, np.random.default_rng(42))
    assert a == b


def test_random_balance():
    rng = np.random.default_rng(2025)
    ones = sum(random_bitvec(1, rng).value for _ in range(10_000))
    assert 0.45 <= ones / 10_000 <= 0.55


def test_concat_and_slice():
    parts = [parse("01", 2), parse("11", 2), parse("00", 2)]
    v = BitVec.concat(parts)
    assert format_bits(v, 2) == "00 11 01"
    assert [v.slice(2 * k, 2) for k in range(3)] == parts


@given(same_len(1, max_len=64))
def test_popcount_matches_bits(vs):
    (v,) = vs
    assert v.popcount() == int(v.to_bits().sum())
    assert v.is_zero() == (v.popcount() == 0)
