"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from functools import reduce
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from . import verify
from .gf2vec import BitVec, ParseError, format_bits, parse
from .layout import AggregatedVector, Dimensions, aggregate, build_extended
from .protocol import ConfigError, ProtocolConfig, ProtocolError, run_full, verify_trace
from .qsim import (
    DEFAULT_DENSE_CAP,
    DEFAULT_STRUCTURED_CAP,
    SimulatorCapError,
    apply_phase_oracle,
    ghz_diagonal_init,
    sample_measurements,
)
from .shuffle import is_block_permutation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_secret(text: str, m: int) -> BitVec:
    """``0x``/``0b`` prefixes are explicit; otherwise exactly ``m`` binary
    digits read as binary, anything else as hex."""
    text = text.strip()
    try:
        if text.lower().startswith("0x"):
            return BitVec.from_hex(text[2:], m)
        if text.lower().startswith("0b"):
            return parse(text[2:], m)
        if len(text) == m and set(text) <= {"0", "1"}:
            return parse(text, m)
        return BitVec.from_hex(text, m)
    except ValueError as exc:
        raise UsageError(f"bad secret {text!r} for m={m}: {exc}") from exc


def parse_secrets(text: str, n: int, m: int) -> list[BitVec]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise UsageError(f"--secrets lists {len(parts)} values but --n is {n}")
    return [parse_secret(p, m) for p in parts]


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QDIBP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"QDIBP_SEED must be an integer, got {env!r}") from exc
    return 0


def _config(args: argparse.Namespace) -> ProtocolConfig:
    secrets = parse_secrets(args.secrets, args.n, args.m) if args.secrets else None
    if secrets is None and args.secret_seed is None:
        raise UsageError("give --secrets or --secret-seed")
    try:
        return ProtocolConfig(
            n=args.n,
            m=args.m,
            seed=_seed(args),
            secrets=secrets,
            secret_seed=args.secret_seed,
            debug_permutations=getattr(args, "debug_permutations", False),
            dealer=getattr(args, "dealer", "trent"),
            structured_cap=getattr(args, "structured_cap", DEFAULT_STRUCTURED_CAP),
        )
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc


def _dealer(text: str) -> str | int:
    return int(text) if text.isdigit() else text


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    trace = run_full(cfg)
    out = Path(args.out or f"qdibp-run-n{cfg.n}-m{cfg.m}-seed{cfg.seed}.jsonl")
    out.write_text(trace.to_jsonl())
    for w in trace.warnings:
        print(f"warning: {w}")
    group = cfg.m * cfg.n
    print(f"t         = {format_bits(trace.t.bits, group)}")
    print(f"shuffled  = {format_bits(trace.shuffled.bits, group)}")
    for i in range(cfg.n):
        got = ", ".join(format_bits(s) for s in trace.recovered[i])
        print(f"broker{i} recovered {{{got}}}")
    checks = verify_trace(trace)
    for name, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    print(f"trace written to {out}")
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_reproduce_paper(args: argparse.Namespace) -> int:
    dims = verify.example_dims()
    names = ("Charlie", "Bob", "Alice")
    ext = [build_extended(i, s, dims) for i, s in enumerate(verify.example_secrets())]
    t = aggregate(ext, dims)
    rows = []
    for i, e in enumerate(ext):
        rows.append((f"extended {names[i]} (broker{i})", format_bits(e.bits, 3), verify.EXAMPLE_EXTENDED[i]))
    rows.append(("aggregated t", format_bits(t.bits, 3), verify.EXAMPLE_T))
    tt = AggregatedVector(dims, parse(verify.EXAMPLE_SHUFFLED, dims.p), shuffled=True)
    perm_ok = is_block_permutation(t, tt)
    rows.append(("t vs shuffled is block permutation", str(perm_ok), "True"))

    state = ghz_diagonal_init(dims.p, dims.n + 1)
    for e in ext:
        state = apply_phase_oracle(state, e.bits)
    bits = sample_measurements(state, np.random.default_rng(_seed(args)), args.samples)
    xor = np.bitwise_xor.reduce(bits, axis=1)
    failures = int(np.count_nonzero(np.any(xor != t.bits.to_bits(), axis=1)))
    rows.append((f"phase 1 samples with XOR != t (of {args.samples})", str(failures), "0"))

    width = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{width}}  {'computed':<13}  {'reference':<13}  match")
    bad = 0
    for label, got, want in rows:
        ok = got == want
        bad += not ok
        print(f"{label:<{width}}  {got:<13}  {want:<13}  {'yes' if ok else 'NO'}")
    if bad:
        print(f"{bad} mismatch(es)", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = verify.run_suite(args.suite, seed=_seed(args), dense_cap=args.dense_cap)
    summary = {
        "suite": args.suite,
        "passed": all(r.passed for r in results),
        "checks": [r.to_json() for r in results],
    }
    if args.json:
        print(json.dumps(summary, indent=2, default=str))
    else:
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.seconds:.2f}s)")
            if not r.passed:
                print(f"    {json.dumps(r.detail, default=str)}")
        print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if args.out:
        Path(args.out).write_text(json.dumps(summary, indent=2, default=str) + "\n")
    return EXIT_OK if summary["passed"] else EXIT_FAIL


def sample_distribution(state, samples: int, seed: int, top: int) -> dict:
    """Histogram and statistics for joint register outcomes of a GHZ-diagonal state."""
    bits = sample_measurements(state, np.random.default_rng(seed), samples)
    r, p = state.r, state.p
    xor = np.bitwise_xor.reduce(bits, axis=1)
    z_counts = Counter(format_bits(BitVec.from_bits(z)) for z in xor)
    keys = [" ".join(format_bits(BitVec.from_bits(y)) for y in reversed(row)) for row in bits]
    hist = Counter(keys)
    admissible = 2 ** ((r - 1) * p) * len(z_counts)
    report = {
        "p": p,
        "r": r,
        "samples": samples,
        "distinct_outcomes": len(hist),
        "xor_values": dict(z_counts),
        "top": hist.most_common(top),
    }
    if len(z_counts) == 1 and admissible * 5 <= samples:
        counts = np.zeros(admissible, dtype=np.int64)
        weights = 1 << np.arange((r - 1) * p, dtype=np.int64)
        free = bits[:, 1:, :].reshape(samples, -1).astype(np.int64) @ weights
        np.add.at(counts, free, 1)
        res = stats.chisquare(counts)
        report["uniformity"] = {"cells": admissible, "chi2": float(res.statistic), "pvalue": float(res.pvalue)}
    elif (1 << p) * 5 <= samples:
        # too many joint cells; test the first register's marginal instead
        counts = np.bincount(bits[:, 0, :].astype(np.int64) @ (1 << np.arange(p)), minlength=1 << p)
        res = stats.chisquare(counts)
        report["uniformity"] = {"cells": 1 << p, "register": 0, "chi2": float(res.statistic), "pvalue": float(res.pvalue)}
    return report


def cmd_sample_dist(args: argparse.Namespace) -> int:
    seed = _seed(args)
    try:
        if args.p is not None:
            state = ghz_diagonal_init(args.p, args.r or 2, args.structured_cap)
            target = None
        else:
            cfg = _config(args)
            dims = Dimensions(cfg.n, cfg.m)
            ext = [build_extended(i, s, dims) for i, s in enumerate(cfg.resolved_secrets())]
            state = ghz_diagonal_init(dims.p, dims.n + 1, args.structured_cap)
            for e in ext:
                state = apply_phase_oracle(state, e.bits)
            target = aggregate(ext, dims).bits
    except SimulatorCapError as exc:
        raise UsageError(str(exc)) from exc
    report = sample_distribution(state, args.samples, seed, args.top)
    if target is None:
        target = BitVec(state.p, 0)
    report["expected_xor"] = format_bits(target)
    hits = report["xor_values"].get(format_bits(target), 0)
    report["xor_constraint_pass_rate"] = hits / args.samples
    print(f"p={report['p']} r={report['r']} samples={args.samples} distinct={report['distinct_outcomes']}")
    print(f"XOR constraint pass rate: {100 * report['xor_constraint_pass_rate']:.2f}% (expected XOR {report['expected_xor']})")
    for key, count in report["top"]:
        print(f"  {key}  {count}")
    if "uniformity" in report:
        u = report["uniformity"]
        print(f"equiprobability: chi2={u['chi2']:.2f} over {u['cells']} cells, p-value={u['pvalue']:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["xor_constraint_pass_rate"] == 1.0 else EXIT_FAIL


def _add_config_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--n", type=int, required=required, help="number of brokers")
    p.add_argument("--m", type=int, required=required, help="bits per secret")
    p.add_argument("--secrets", help="comma list, binary (m digits) or hex")
    p.add_argument("--secret-seed", type=int, help="draw secrets from this seed when --secrets is absent")
    p.add_argument("--structured-cap", type=int, default=DEFAULT_STRUCTURED_CAP)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdibp", description=__doc__)
    parser.add_argument("--seed", type=int, help="master seed (falls back to $QDIBP_SEED, then 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full protocol and write a JSON-lines trace")
    _add_config_flags(run)
    run.add_argument("--out", help="trace path")
    run.add_argument("--debug-permutations", action="store_true", help="record Trent's permutations")
    run.add_argument("--dealer", type=_dealer, default="trent", help="'trent' or a broker index")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("reproduce-paper", help="recompute the 3-broker worked example")
    rep.add_argument("--samples", type=int, default=1000)
    rep.set_defaults(func=cmd_reproduce_paper)

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument("--suite", choices=("fast", "full"), default="fast")
    ver.add_argument("--dense-cap", type=int, default=DEFAULT_DENSE_CAP)
    ver.add_argument("--json", action="store_true", help="print the JSON summary instead of text")
    ver.add_argument("--out", help="also write the JSON summary here")
    ver.set_defaults(func=cmd_verify)

    dist = sub.add_parser("sample-dist", help="outcome histogram of the phase 1 measurement")
    _add_config_flags(dist, required=False)
    dist.add_argument("--p", type=int, help="bare GHZ state: qubits per register (ignores --n/--m)")
    dist.add_argument("--r", type=int, help="bare GHZ state: number of registers")
    dist.add_argument("--samples", type=int, default=10_000)
    dist.add_argument("--top", type=int, default=10)
    dist.add_argument("--out", help="write the JSON report here")
    dist.set_defaults(func=cmd_sample_dist)

    # allow --seed after the subcommand as well
    for p in (run, rep, ver, dist):
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "sample-dist" and args.p is None and (args.n is None or args.m is None):
        print("error: sample-dist needs --n and --m, or --p", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolError as exc:
        print(f"protocol failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
