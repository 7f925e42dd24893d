import json

import pytest

from qdibp.cli import UsageError, main, parse_secret, parse_secrets


def test_secret_parsing():
    assert parse_secret("1", 1).value == 1
    assert parse_secret("10", 2).value == 2
    assert parse_secret("0x1f", 8).value == 0x1F
    assert parse_secret("0b101", 3).value == 5
    # not exactly m binary digits, so hex
    assert parse_secret("10", 8).value == 0x10
    assert [s.value for s in parse_secrets("1,0,1", 3, 1)] == [1, 0, 1]
    with pytest.raises(UsageError):
        parse_secrets("1,0", 3, 1)
    with pytest.raises(UsageError):
        parse_secret("0x1ff", 8)


def test_run_example(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    assert main(["run", "--n", "3", "--m", "1", "--secrets", "1,0,1", "--seed", "7", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "t         = 010 101 010" in text
    assert "[FAIL]" not in text
    events = [json.loads(line) for line in out.read_text().splitlines()]
    agg = [e for e in events if e["event"] == "aggregate"]
    assert agg[0]["payload_hex"] == "0aa"  # 010 101 010, padded to 9 bits


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["run", "--n", "3", "--m", "2", "--secret-seed", "4", "--seed", "9"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_default_output_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("QDIBP_SEED", "5")
    assert main(["run", "--n", "2", "--m", "2", "--secrets", "01,10"]) == 0
    assert (tmp_path / "qdibp-run-n2-m2-seed5.jsonl").exists()


def test_r6_warning_still_completes(tmp_path, capsys):
    code = main(["run", "--n", "2", "--m", "1", "--secrets", "0,0", "--seed", "1", "--out", str(tmp_path / "x")])
    assert code == 0
    assert "R6 violated" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert main(["run", "--n", "3", "--m", "1", "--secrets", "1,0"]) == 2
    assert main(["run", "--n", "1", "--m", "1", "--secrets", "1"]) == 2
    assert main(["run", "--n", "3", "--m", "1"]) == 2
    assert main(["bogus"]) == 2
    assert main(["sample-dist", "--samples", "10"]) == 2
    assert main(["sample-dist", "--p", "25", "--r", "2"]) == 2
    capsys.readouterr()


def test_reproduce_paper(capsys):
    assert main(["reproduce-paper"]) == 0
    out = capsys.readouterr().out
    for want in ("001 001 110", "000 000 000", "011 100 100", "010 101 010"):
        assert want in out
    assert " NO" not in out


def test_verify_defaults_to_fast(tmp_path, capsys):
    summary = tmp_path / "s.json"
    assert main(["verify", "--out", str(summary)]) == 0
    data = json.loads(summary.read_text())
    assert data["suite"] == "fast" and data["passed"]
    assert "checks passed" in capsys.readouterr().out


def test_sample_dist_bell(capsys):
    assert main(["sample-dist", "--p", "1", "--r", "2", "--samples", "4000", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "distinct=2" in out and "100.00%" in out


def test_sample_dist_example(tmp_path):
    report = tmp_path / "r.json"
    args = ["sample-dist", "--n", "3", "--m", "1", "--secrets", "1,0,1", "--samples", "10000", "--out", str(report)]
    assert main(args) == 0
    data = json.loads(report.read_text())
    assert data["xor_constraint_pass_rate"] == 1.0
    assert data["expected_xor"] == "010101010"
    assert "uniformity" in data


def test_sample_dist_p2_r3(tmp_path):
    report = tmp_path / "r.json"
    assert main(["sample-dist", "--p", "2", "--r", "3", "--samples", "16000", "--seed", "2025", "--out", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["distinct_outcomes"] == 16
    assert data["uniformity"]["cells"] == 16
    assert data["uniformity"]["pvalue"] > 0.01
