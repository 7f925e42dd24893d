import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qdibp.gf2vec import BitVec, DimensionError, parse
from qdibp.layout import Dimensions, build_extended, expected_blocks
from qdibp.qsim import (
    Gate,
    SimulatorCapError,
    UnnormalizedStateError,
    apply_h,
    apply_phase_oracle,
    apply_x,
    apply_xor_oracle,
    build_phase1_circuit,
    build_phase3_circuit,
    cnot_depth,
    dense_init,
    exact_outcome_distribution,
    fidelity,
    ghz_diagonal_init,
    ghz_prep_gates,
    ghz_product_init,
    ghz_reference_amps,
    phase_signs,
    run_gates,
    sample_measurement,
    sample_measurements,
    wht,
    wht_direct,
)
from qdibp.qsim.structured import GhzDiagonalState
from qdibp.shuffle import random_permutation, shuffle_aggregated


def hadamard_matrix(p):
    h = np.array([[1.0]])
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    for _ in range(p):
        h = np.kron(h1, h)
    return h


def test_wht_matches_kron_matrix():
    rng = np.random.default_rng(1)
    for p in range(1, 8):
        a = rng.normal(size=1 << p) + 1j * rng.normal(size=1 << p)
        assert np.allclose(wht(a), hadamard_matrix(p) @ a, atol=1e-12)
        assert np.allclose(wht_direct(a), hadamard_matrix(p) @ a, atol=1e-12)


@settings(max_examples=40)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_wht_fast_vs_direct(p, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=1 << p) + 1j * rng.normal(size=1 << p)
    assert np.max(np.abs(wht(a) - wht_direct(a))) < 1e-10
    assert np.max(np.abs(wht(wht(a)) - a)) < 1e-12


def test_wht_does_not_mutate_and_rejects_bad_length():
    a = np.arange(4, dtype=np.complex128)
    before = a.copy()
    wht(a)
    assert np.array_equal(a, before)
    with pytest.raises(ValueError):
        wht(np.ones(3))


def test_phase_signs_against_dot():
    v = parse("1011", 4)
    for x in range(16):
        assert phase_signs(v)[x] == (-1) ** (bin(x & v.value).count("1") % 2)


def xor_oracle_matrix(mask: BitVec, width: int) -> np.ndarray:
    # explicit permutation matrix on width input qubits plus target at position width
    dim = 1 << (width + 1)
    u = np.zeros((dim, dim))
    for idx in range(dim):
        x = idx & ((1 << width) - 1)
        f = bin(x & mask.value).count("1") & 1
        u[idx ^ (f << width), idx] = 1
    return u


def test_xor_oracle_against_matrix():
    rng = np.random.default_rng(5)
    for _ in range(20):
        width = int(rng.integers(1, 7))
        mask = BitVec(width, int(rng.integers(0, 1 << width)))
        psi = rng.normal(size=1 << (width + 1)) + 1j * rng.normal(size=1 << (width + 1))
        psi /= np.linalg.norm(psi)
        st_ = dense_init(width + 1)
        st_.amps[:] = psi
        apply_xor_oracle(st_, mask, range(width), width)
        assert np.allclose(st_.amps, xor_oracle_matrix(mask, width) @ psi)


def test_phase_kickback():
    rng = np.random.default_rng(2025)
    for _ in range(50):
        width = int(rng.integers(1, 10))
        v = BitVec(width, int(rng.integers(0, 1 << width)))
        st_ = dense_init(width + 1)
        for q in range(width):
            apply_h(st_, q)
        apply_x(st_, width)
        apply_h(st_, width)
        before = st_.amps.copy()
        apply_xor_oracle(st_, v, range(width), width)
        diag = np.concatenate([phase_signs(v)] * 2)
        assert fidelity(st_.amps, before * diag) >= 1 - 1e-10


@pytest.mark.parametrize("r", [2, 3, 4, 5, 8])
def test_ghz_prep(r):
    gates = ghz_prep_gates(r)
    st_ = run_gates(gates, dense_init(r))
    assert fidelity(st_, ghz_reference_amps(r)) >= 1 - 1e-12
    assert cnot_depth(gates) == math.ceil(math.log2(r))


def test_ghz_diagonal_init():
    s = ghz_diagonal_init(4, 3)
    assert np.allclose(s.amps, 2 ** -2)
    assert abs(s.norm() - 1) < 1e-12


def test_product_matches_diagonal():
    rng = np.random.default_rng(9)
    p, r = 6, 4
    diag, prod = ghz_diagonal_init(p, r), ghz_product_init(p, r)
    for _ in range(3):
        v = BitVec(p, int(rng.integers(0, 1 << p)))
        diag, prod = apply_phase_oracle(diag, v), apply_phase_oracle(prod, v)
    assert np.allclose(prod.to_amps(), diag.amps)
    assert np.allclose(prod.xor_distribution(), diag.xor_distribution())


def test_product_state_beyond_cap_is_deterministic_in_xor():
    p = 32
    v = BitVec(p, 0xDEADBEEF)
    prod = apply_phase_oracle(ghz_product_init(p, 5), v)
    bits = sample_measurements(prod, np.random.default_rng(0), 200)
    z = np.bitwise_xor.reduce(bits, axis=1)
    assert np.all(z == v.to_bits())
    with pytest.raises(SimulatorCapError):
        ghz_diagonal_init(p, 5)
    with pytest.raises(SimulatorCapError):
        prod.to_amps()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_xor_constraint_after_oracles(p, r, seed):
    rng = np.random.default_rng(seed)
    state = ghz_diagonal_init(p, r)
    total = BitVec(p, 0)
    for _ in range(int(rng.integers(1, 4))):
        v = BitVec(p, int(rng.integers(0, 1 << p)))
        state = apply_phase_oracle(state, v)
        total = total ^ v
        assert abs(state.norm() - 1) < 1e-12
    order = list(rng.permutation(r))
    bits = sample_measurements(state, rng, 50, order)
    assert np.all(np.bitwise_xor.reduce(bits, axis=1) == total.to_bits())


def test_measurement_order_does_not_change_distribution():
    p, r = 2, 3
    state = apply_phase_oracle(ghz_diagonal_init(p, r), parse("10", 2))
    weights = 1 << np.arange(p * r)
    hists = []
    for order in ([0, 1, 2], [2, 0, 1]):
        bits = sample_measurements(state, np.random.default_rng(11), 20_000, order)
        idx = bits.reshape(len(bits), -1) @ weights
        hists.append(np.bincount(idx, minlength=1 << (p * r)))
    assert np.count_nonzero(hists[0]) == np.count_nonzero(hists[1]) == 16
    assert stats.chi2_contingency(np.array([h[h > 0] for h in hists])).pvalue > 0.01


def test_p2_r3_sixteen_uniform_tuples():
    bits = sample_measurements(ghz_diagonal_init(2, 3), np.random.default_rng(2025), 16_000)
    idx = bits.reshape(len(bits), -1) @ (1 << np.arange(6))
    counts = np.bincount(idx, minlength=64)
    assert np.count_nonzero(counts) == 16
    assert stats.chisquare(counts[counts > 0]).pvalue > 0.01


def test_bell_pair():
    bits = sample_measurements(ghz_diagonal_init(1, 2), np.random.default_rng(3), 10_000)
    assert np.all(bits[:, 0, 0] == bits[:, 1, 0])
    assert 0.45 < bits[:, 0, 0].mean() < 0.55


def test_sample_measurement_returns_registers():
    ys = sample_measurement(ghz_diagonal_init(3, 4), np.random.default_rng(0))
    assert len(ys) == 4 and all(y.len == 3 for y in ys)
    assert (ys[0] ^ ys[1] ^ ys[2] ^ ys[3]).is_zero()


def test_errors():
    with pytest.raises(SimulatorCapError):
        ghz_diagonal_init(21, 2)
    with pytest.raises(SimulatorCapError):
        dense_init(25)
    with pytest.raises(ValueError):
        ghz_diagonal_init(2, 1)
    with pytest.raises(DimensionError):
        apply_phase_oracle(ghz_diagonal_init(3, 2), parse("01", 2))
    bad = GhzDiagonalState(1, 2, np.array([1.0, 1.0], dtype=np.complex128))
    with pytest.raises(UnnormalizedStateError):
        sample_measurements(bad, np.random.default_rng(0), 1)
    with pytest.raises(ValueError):
        sample_measurements(ghz_diagonal_init(1, 3), np.random.default_rng(0), 1, order=[0, 0, 1])
    with pytest.raises(IndexError):
        apply_h(dense_init(2), 2)
    with pytest.raises(ValueError):
        Gate("SWAP", (0, 1))


def test_phase1_dense_matches_structured_exactly():
    d = Dimensions(2, 1)
    ext = [build_extended(0, parse("1", 1), d), build_extended(1, parse("0", 1), d)]
    circ = build_phase1_circuit(d, ext)
    assert circ.num_qubits == 14
    dense = circ.register_distribution(circ.run())
    state = ghz_diagonal_init(d.p, 3)
    for e in ext:
        state = apply_phase_oracle(state, e.bits)
    assert np.allclose(dense, exact_outcome_distribution(state), atol=1e-12)


def test_phase3_dense_matches_structured_exactly():
    d = Dimensions(2, 1)
    rng = np.random.default_rng(4)
    t = expected_blocks([parse("1", 1), parse("0", 1)], d)
    tt = shuffle_aggregated(t, [random_permutation(2, rng) for _ in range(2)])
    circ = build_phase3_circuit(d, tt)
    dense = circ.register_distribution(circ.run())
    state = apply_phase_oracle(ghz_diagonal_init(d.p, 3), tt.bits)
    assert np.allclose(dense, exact_outcome_distribution(state), atol=1e-12)


def test_circuit_cap():
    d = Dimensions(2, 2)
    ext = [build_extended(i, parse("01", 2), d) for i in range(2)]
    with pytest.raises(SimulatorCapError):
        build_phase1_circuit(d, ext)
