"""Named verification checks shared by the CLI ``verify`` command and the
acceptance tests.

Each check returns a plain dict of measured quantities plus a ``passed``
flag, so callers can print or assert on the numbers.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np
from scipy import stats

from .gf2vec import BitVec, dot, format_bits, parse, random_bitvec, xor, zero
from .layout import AggregatedVector, Dimensions, aggregate, build_extended, expected_blocks, segment
from .protocol import ProtocolConfig, run_full, verify_trace
from .protocol.model import TRENT
from .qsim import (
    DEFAULT_DENSE_CAP,
    apply_h,
    apply_phase_oracle,
    apply_x,
    apply_xor_oracle,
    build_phase1_circuit,
    cnot_depth,
    dense_init,
    exact_outcome_distribution,
    fidelity,
    ghz_diagonal_init,
    ghz_prep_gates,
    ghz_reference_amps,
    phase_signs,
    run_gates,
    sample_measurements,
    wht,
    wht_direct,
)
from .shuffle import find_witnesses, is_block_permutation, random_permutation, shuffle_aggregated

__all__ = [
    "EXAMPLE_SECRETS",
    "EXAMPLE_EXTENDED",
    "EXAMPLE_T",
    "EXAMPLE_SHUFFLED",
    "example_dims",
    "example_secrets",
    "CheckResult",
    "example_extended_vectors",
    "example_shuffle_consistency",
    "phase1_constraint",
    "phase3_constraint",
    "tier_equivalence",
    "phase_kickback",
    "wht_oracle",
    "ghz_preparation",
    "end_to_end",
    "anonymity_positions",
    "offset_invariance",
    "run_suite",
]

# Worked example: Charlie = broker 0, Bob = broker 1, Alice = broker 2.
EXAMPLE_SECRETS = ("1", "0", "1")
EXAMPLE_EXTENDED = ("001 001 110", "000 000 000", "011 100 100")
EXAMPLE_T = "010 101 010"
EXAMPLE_SHUFFLED = "001 110 100"


def example_dims() -> Dimensions:
    return Dimensions(3, 1)


def example_secrets() -> list[BitVec]:
    return [parse(s, 1) for s in EXAMPLE_SECRETS]


def _xor_all(vs):
    return reduce(lambda a, b: a ^ b, vs)


def example_extended_vectors() -> dict:
    dims = example_dims()
    ext = [build_extended(i, s, dims) for i, s in enumerate(example_secrets())]
    ext_txt = [format_bits(e.bits, 3) for e in ext]
    t_txt = format_bits(aggregate(ext, dims).bits, 3)
    return {
        "passed": tuple(ext_txt) == EXAMPLE_EXTENDED and t_txt == EXAMPLE_T,
        "extended": ext_txt,
        "t": t_txt,
    }


def example_shuffle_consistency() -> dict:
    dims = example_dims()
    t = AggregatedVector(dims, parse(EXAMPLE_T, 9))
    tt = AggregatedVector(dims, parse(EXAMPLE_SHUFFLED, 9), shuffled=True)
    witnesses = list(find_witnesses(t, tt))
    return {
        "passed": is_block_permutation(t, tt) and len(witnesses) > 0,
        "block_permutation": is_block_permutation(t, tt),
        "witnesses": len(witnesses),
        "searched": math.factorial(dims.n) ** dims.n,
        "example_witness": [p.to_json() for p in witnesses[0]] if witnesses else None,
    }


def _constraint_failures_full(bits: np.ndarray, target: BitVec) -> int:
    z = np.bitwise_xor.reduce(bits, axis=1)
    return int(np.count_nonzero(np.any(z != target.to_bits(), axis=1)))


def phase1_constraint(samples: int, seed: int) -> dict:
    """Every Phase 1 sample's registers XOR to t."""
    dims = example_dims()
    ext = [build_extended(i, s, dims) for i, s in enumerate(example_secrets())]
    state = ghz_diagonal_init(dims.p, dims.n + 1)
    for e in ext:
        state = apply_phase_oracle(state, e.bits)
    bits = sample_measurements(state, np.random.default_rng(seed), samples)
    t = aggregate(ext, dims).bits
    failures = _constraint_failures_full(bits, t)
    return {"passed": failures == 0, "samples": samples, "failures": failures, "t": format_bits(t, 3)}


def phase3_constraint(samples: int, seed: int) -> dict:
    """Every Phase 3 sample satisfies the XOR constraint segment by segment."""
    dims = example_dims()
    rng = np.random.default_rng(seed)
    t = expected_blocks(example_secrets(), dims)
    tt = shuffle_aggregated(t, [random_permutation(dims.n, rng) for _ in range(dims.n)])
    state = apply_phase_oracle(ghz_diagonal_init(dims.p, dims.n + 1), tt.bits)
    bits = sample_measurements(state, rng, samples)
    w = dims.segment_width
    z = np.bitwise_xor.reduce(bits, axis=1)
    want = tt.bits.to_bits()
    failures = 0
    for j in range(dims.n):
        failures += int(np.count_nonzero(np.any(z[:, j * w:(j + 1) * w] != want[j * w:(j + 1) * w], axis=1)))
    return {"passed": failures == 0, "samples": samples, "segment_failures": failures, "shuffled": format_bits(tt.bits, 3)}


def tier_equivalence(
    samples: int, seed: int, secrets: tuple[str, ...] = ("1", "0"), cap: int = DEFAULT_DENSE_CAP
) -> dict:
    """Dense 14-qubit Phase 1 circuit against the structured sampler.

    Compares supports exactly, and the structured tier's empirical
    distribution over ``samples`` shots with the dense statevector's exact
    outcome distribution.
    """
    dims = Dimensions(2, 1)
    sec = [parse(s, 1) for s in secrets]
    ext = [build_extended(i, s, dims) for i, s in enumerate(sec)]
    circ = build_phase1_circuit(dims, ext, cap)
    dense = circ.register_distribution(circ.run(cap))

    state = ghz_diagonal_init(dims.p, dims.n + 1)
    for e in ext:
        state = apply_phase_oracle(state, e.bits)
    structured = exact_outcome_distribution(state)

    bits = sample_measurements(state, np.random.default_rng(seed), samples)
    weights = 1 << np.arange(dims.p * (dims.n + 1), dtype=np.int64)
    idx = bits.reshape(samples, -1).astype(np.int64) @ weights
    empirical = np.bincount(idx, minlength=dense.shape[0]) / samples

    dense_support = dense > 1e-12
    support_equal = bool(np.array_equal(dense_support, structured > 1e-12))
    outside = int(np.count_nonzero(~dense_support[idx]))
    tv = 0.5 * float(np.abs(empirical - dense).sum())
    tv_exact = 0.5 * float(np.abs(structured - dense).sum())
    k = int(dense_support.sum())
    # expected TV of a perfect sampler against the truth, for reference
    noise_floor = 0.5 * k * math.sqrt(2 / math.pi) * math.sqrt((1 / k) * (1 - 1 / k) / samples)
    return {
        "passed": support_equal and outside == 0 and tv < 0.02,
        "num_qubits": circ.num_qubits,
        "support_size": k,
        "support_equal": support_equal,
        "samples_outside_support": outside,
        "tv_empirical": tv,
        "tv_exact": tv_exact,
        "tv_noise_floor": noise_floor,
        "samples": samples,
    }


def phase_kickback(masks: int, seed: int, max_qubits: int = 10) -> dict:
    """XOR oracle on a |-> target equals the diagonal phase (-1)^dot(v, x)."""
    rng = np.random.default_rng(seed)
    worst = 1.0
    for _ in range(masks):
        width = int(rng.integers(1, max_qubits))  # input qubits, plus one target
        v = random_bitvec(width, rng)
        st = dense_init(width + 1)
        for q in range(width):
            apply_h(st, q)
        apply_x(st, width)
        apply_h(st, width)
        before = st.amps.copy()
        apply_xor_oracle(st, v, range(width), width)
        expected = before * np.concatenate([phase_signs(v), phase_signs(v)])
        worst = min(worst, fidelity(st.amps, expected))
    return {"passed": worst >= 1 - 1e-10, "masks": masks, "min_fidelity": worst}


def wht_oracle(max_p: int, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    max_err = 0.0
    max_inv = 0.0
    for p in range(1, max_p + 1):
        a = rng.normal(size=1 << p) + 1j * rng.normal(size=1 << p)
        max_err = max(max_err, float(np.max(np.abs(wht(a) - wht_direct(a)))))
        max_inv = max(max_inv, float(np.max(np.abs(wht(wht(a)) - a))))
    return {"passed": max_err < 1e-10 and max_inv < 1e-12, "max_p": max_p, "max_error": max_err, "max_involution_error": max_inv}


def ghz_preparation(rs=(2, 3, 4, 5, 8)) -> dict:
    rows = []
    ok = True
    for r in rs:
        gates = ghz_prep_gates(r)
        st = run_gates(gates, dense_init(r))
        f = fidelity(st.amps, ghz_reference_amps(r))
        depth = cnot_depth(gates)
        good = f >= 1 - 1e-12 and depth == math.ceil(math.log2(r))
        ok &= good
        rows.append({"r": r, "fidelity": f, "cnot_depth": depth})
    return {"passed": ok, "cases": rows}


def _all_secret_assignments(dims: Dimensions):
    vals = [BitVec(dims.m, v) for v in range(1 << dims.m)]
    return itertools.product(vals, repeat=dims.n)


def end_to_end(exhaustive=((2, 1), (2, 2), (3, 1)), random_configs: int = 200, seed: int = 0) -> dict:
    """Every broker recovers exactly the other brokers' secrets."""
    failures = []
    runs = 0
    for n, m in exhaustive:
        dims = Dimensions(n, m)
        for k, secrets in enumerate(_all_secret_assignments(dims)):
            trace = run_full(ProtocolConfig(n=n, m=m, seed=seed + k, secrets=list(secrets)))
            runs += 1
            checks = verify_trace(trace)
            if not all(checks.values()):
                failures.append({"n": n, "m": m, "secrets": [s.to_hex() for s in secrets], "checks": checks})
    rng = np.random.default_rng(seed)
    for k in range(random_configs):
        n, m = int(rng.integers(2, 5)), int(rng.integers(1, 3))
        cfg = ProtocolConfig(n=n, m=m, seed=int(rng.integers(2**31)), secret_seed=int(rng.integers(2**31)))
        trace = run_full(cfg)
        runs += 1
        checks = verify_trace(trace)
        if not all(checks.values()):
            failures.append({"config": cfg.to_json(), "checks": checks})
    return {"passed": not failures, "runs": runs, "failures": failures[:5], "failure_count": len(failures)}


def anonymity_positions(runs: int, seed: int) -> dict:
    """Position of each foreign block within each broker's shuffled segment,
    over repeated runs of the worked example; chi-square against uniform."""
    dims = example_dims()
    counts = {(i, j): np.zeros(dims.n, dtype=np.int64) for i in range(dims.n) for j in range(dims.n) if i != j}
    for k in range(runs):
        trace = run_full(ProtocolConfig(n=3, m=1, seed=seed + k, secrets=example_secrets(), debug_permutations=True))
        for i, perm in enumerate(trace.permutations):
            for pos, src in enumerate(perm):
                if src != i:
                    counts[(i, src)][pos] += 1
    pvalues = {f"broker{i}<-broker{j}": float(stats.chisquare(c).pvalue) for (i, j), c in counts.items()}
    return {
        "passed": min(pvalues.values()) > 0.01,
        "runs": runs,
        "pvalues": pvalues,
        "counts": {f"broker{i}<-broker{j}": c.tolist() for (i, j), c in counts.items()},
    }


def _trent_view(trace) -> list[dict]:
    return trace.observed_by(TRENT)


def offset_invariance(max_m: int = 3, n: int = 3, seed: int = 0) -> dict:
    """Shifting every secret by a common offset leaves t, the shuffled vector
    and all of Trent's traffic unchanged under the same seed."""
    rng = np.random.default_rng(seed)
    mismatches = []
    checked = 0
    for m in range(1, max_m + 1):
        base = [random_bitvec(m, rng) for _ in range(n)]
        ref = run_full(ProtocolConfig(n=n, m=m, seed=seed, secrets=base))
        for c in range(1 << m):
            off = BitVec(m, c)
            trace = run_full(ProtocolConfig(n=n, m=m, seed=seed, secrets=[s ^ off for s in base]))
            checked += 1
            same = (
                trace.t.bits == ref.t.bits
                and trace.shuffled.bits == ref.shuffled.bits
                and _trent_view(trace) == _trent_view(ref)
            )
            if not same:
                mismatches.append({"m": m, "offset": off.to_hex()})
    return {"passed": not mismatches, "offsets_checked": checked, "mismatches": mismatches}


def gf2_properties(max_cip: int, samples: int, seed: int) -> dict:
    """XOR group laws (exhaustive to length 4), bilinearity, CIP, text round trip."""
    problems = []
    for length in range(1, 5):
        vs = [BitVec(length, v) for v in range(1 << length)]
        for a, b in itertools.product(vs, repeat=2):
            if xor(a, b) != xor(b, a) or xor(a, a) != zero(length) or xor(a, zero(length)) != a:
                problems.append(("group", length))
        for a, b, c in itertools.product(vs, repeat=3):
            if xor(xor(a, b), c) != xor(a, xor(b, c)):
                problems.append(("assoc", length))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        length = int(rng.integers(1, 64))
        a, b, c = (random_bitvec(length, rng) for _ in range(3))
        if dot(xor(a, b), c) != dot(a, c) ^ dot(b, c):
            problems.append(("bilinear", length))
        if parse(format_bits(a, 3), length) != a:
            problems.append(("roundtrip", length))
    for p in range(1, max_cip + 1):
        xs = np.arange(1 << p)
        for c in range(1 << p):
            zeros = int(np.count_nonzero((np.bitwise_count(xs & c) & 1) == 0))
            if zeros != (1 << p if c == 0 else 1 << (p - 1)):
                problems.append(("cip", p, c))
    return {"passed": not problems, "problems": problems[:5], "max_cip_width": max_cip}


def layout_properties(max_n: int, max_m: int) -> dict:
    """aggregate agrees with the block-form construction, exhaustively."""
    mismatches = 0
    checked = 0
    for n in range(2, max_n + 1):
        for m in range(1, max_m + 1):
            dims = Dimensions(n, m)
            for secrets in _all_secret_assignments(dims):
                t = aggregate([build_extended(i, s, dims) for i, s in enumerate(secrets)], dims)
                checked += 1
                if t.bits != expected_blocks(list(secrets), dims).bits:
                    mismatches += 1
                if any(t.block(i, i) != zero(m) for i in range(n)):
                    mismatches += 1
    return {"passed": mismatches == 0, "assignments": checked, "mismatches": mismatches}


def determinism(seed: int = 7) -> dict:
    cfg = dict(n=3, m=1, seed=seed, secrets=example_secrets())
    a = run_full(ProtocolConfig(**cfg)).to_jsonl()
    b = run_full(ProtocolConfig(**cfg)).to_jsonl()
    return {"passed": a == b, "bytes": len(a)}


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3), "detail": self.detail}


def _suite(full: bool, seed: int, dense_cap: int) -> list[tuple[str, Callable[[], dict]]]:
    checks: list[tuple[str, Callable[[], dict]]] = [
        ("gf2vec.properties", lambda: gf2_properties(12 if full else 8, 1000, seed)),
        ("layout.worked_example", example_extended_vectors),
        ("layout.oracle_equivalence", lambda: layout_properties(4 if full else 3, 2)),
        ("shuffle.worked_example", example_shuffle_consistency),
        ("qsim.wht_oracle", lambda: wht_oracle(8 if full else 6, seed)),
        ("qsim.phase_kickback", lambda: phase_kickback(50 if full else 10, seed)),
        ("qsim.ghz_preparation", ghz_preparation),
        ("qsim.phase1_constraint", lambda: phase1_constraint(10_000 if full else 1_000, seed)),
        ("qsim.phase3_constraint", lambda: phase3_constraint(10_000 if full else 1_000, seed)),
        ("protocol.end_to_end", lambda: end_to_end(random_configs=200 if full else 20, seed=seed)),
        ("protocol.offset_invariance", lambda: offset_invariance(3 if full else 2, seed=seed)),
        ("protocol.determinism", lambda: determinism(seed)),
    ]
    if full:
        checks += [
            ("qsim.tier_equivalence", lambda: tier_equivalence(100_000, seed, cap=dense_cap)),
            ("protocol.anonymity", lambda: anonymity_positions(10_000, seed)),
        ]
    return checks


def run_suite(suite: str = "fast", seed: int = 0, dense_cap: int = DEFAULT_DENSE_CAP) -> list[CheckResult]:
    if suite not in ("fast", "full"):
        raise ValueError(f"unknown suite {suite!r}")
    results = []
    for name, fn in _suite(suite == "full", seed, dense_cap):
        t0 = time.perf_counter()
        try:
            detail = fn()
            passed = bool(detail.pop("passed"))
        except Exception as exc:  # a crashing check is a failed check
            detail, passed = {"error": f"{type(exc).__name__}: {exc}"}, False
        results.append(CheckResult(name, passed, time.perf_counter() - t0, detail))
    return results
