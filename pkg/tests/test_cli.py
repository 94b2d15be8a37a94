import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from quatpsh.cli import COMMANDS, run

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE_B = ROOT / "demos" / "data" / "example_b.json"


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_moore_det_example_prints_one(capsys):
    assert run(["moore-det", str(EXAMPLE_B)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split(",")[2] == "moore_det"
    assert out[1].split(",")[2] == "1"


def test_summary_next_to_csv(tmp_path):
    out = tmp_path / "det.csv"
    assert run(["moore-det", "--count", "5", "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["command"] == "moore-det" and summary["seed"] == 0
    assert summary["passed"] is True and summary["rows"] == 5
    assert "fourth_power" in summary["max_deviations"]
    assert summary["inputs"]["count"] == 5


def test_dirichlet_harmonic_case(tmp_path):
    out = tmp_path / "d.csv"
    assert run(["dirichlet", "--case", "harmonic-t", "--h", "1/8", "--out", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["h"]) == 0.125 and float(row["sup_error"]) < 1e-2


@pytest.mark.slow
def test_valuation_two_seeds_agree(tmp_path):
    vals = []
    for seed in (1, 2):
        out = tmp_path / f"v{seed}.csv"
        assert run(["valuation", "--body", "cube", "--k", "1", "--seed", str(seed), "--out", str(out)]) == 0
        (row,) = read_csv(out)
        vals.append((float(row["value"]), float(row["stderr"])))
    (a, sa), (b, sb) = vals
    assert abs(a - b) <= 2 * np.hypot(sa, sb)


@pytest.mark.parametrize("command", ["moore-det", "sylvester", "signature", "hkt-check", "dirichlet"])
def test_deterministic_bytes(tmp_path, command):
    paths = []
    for i in range(2):
        out = tmp_path / f"{i}.csv"
        assert run([command, "--seed", "42", "--out", str(out)]) == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".json").read_bytes() == paths[1].with_suffix(".json").read_bytes()


def test_seed_changes_random_inputs(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["moore-det", "--seed", "1", "--out", str(a)])
    run(["moore-det", "--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"count": 3, "n": 2, "seed": 9}))
    out = tmp_path / "o.csv"
    assert run(["moore-det", "--config", str(cfg), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 3 and all(r["n"] == "2" for r in rows)
    # explicit flags win over the config
    assert run(["moore-det", "--config", str(cfg), "--count", "4", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 4
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(["moore-det", "--config", str(cfg)]) == 2


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["moore-det", str(bad)]) == 2
    assert run(["moore-det", "--unknown-flag"]) == 2
    assert run(["moore-det", "--seed", "-1"]) == 2
    skew = tmp_path / "skew.json"
    skew.write_text(json.dumps({"n": 2, "entries": [[[1, 0, 0, 0], [1, 0, 0, 0]], [[2, 0, 0, 0], [1, 0, 0, 0]]]}))
    assert run(["moore-det", str(skew)]) == 3
    assert run(["moore-det", str(tmp_path / "missing.json")]) == 3
    assert run(["dirichlet", "--h", "0.3"]) == 3
    assert run(["dirichlet", "--h", "1/8", "--max-iter", "2"]) == 4
    assert run(["psh-check", "--count", "0"]) == 0


def test_invariant_failure_exit_code(tmp_path):
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"n": 1, "terms": [{"exponent": [2, 0, 0, 0], "coef": -1.0}]}))
    assert run(["psh-check", str(neg)]) == 0
    assert run(["hkt-check", str(neg)]) == 0
    assert run(["hkt-check", "--strict", str(neg)]) == 5


@pytest.mark.parametrize("command", sorted(set(COMMANDS) - {"valuation", "blocki", "ma-measure"}))
def test_selftests(command, tmp_path):
    assert run([command, "--selftest", "--out", str(tmp_path / "s.csv")]) == 0


def test_entry_point_module():
    proc = subprocess.run(
        [sys.executable, "-m", "quatpsh", "moore-det", str(EXAMPLE_B)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].split(",")[2] == "1"
