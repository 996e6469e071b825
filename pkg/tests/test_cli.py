import csv
import json
import subprocess
import sys

import pytest

from odba_chain.cli import (
    INHOM_COLUMNS,
    SCHEMA_VERSION,
    THERMO_COLUMNS,
    ConfigError,
    RunConfig,
    dumps,
    main,
)
from odba_chain.chain import ModelParams


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


def test_verify_default(capsys):
    code, doc, _ = run(capsys, "verify")
    assert code == 0
    assert doc["schema_version"] == SCHEMA_VERSION
    assert set(doc) >= {"schema_version", "command", "params", "results", "residuals"}
    assert all(r["pass"] for r in doc["results"])


def test_verify_deterministic(capsys):
    _, _, first = run(capsys, "verify", "--sites", "6", "--seed", "7")
    _, _, second = run(capsys, "verify", "--sites", "6", "--seed", "7")
    assert first == second


def test_verify_detects_corruption(capsys):
    code, doc, _ = run(capsys, "verify", "--corrupt-r")
    assert code == 1
    failed = {r["check"] for r in doc["results"] if not r["pass"]}
    assert "ybe" in failed


def test_verify_rejects_large_chain(capsys):
    assert main(["verify", "--sites", "8"]) == 2


def test_table1_and_idempotent_rerun(capsys, tmp_path):
    out = tmp_path / "t1.json"
    assert main(["table1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["matched"] == 16
    energies = [r["energy"] for r in doc["results"]]
    # degenerate levels are ordered by roots, so allow rounding-level inversions
    assert all(b - a > -1e-10 for a, b in zip(energies, energies[1:]))
    assert max(abs(a - b) for a, b in zip(energies, doc["ed_energies"])) < 1e-8
    # polish-only path from the emitted roots
    again = tmp_path / "t1b.json"
    assert main(["table1", "--roots", str(out), "--out", str(again)]) == 0
    assert again.read_text() == out.read_text()
    # parse + reserialise is byte-identical
    assert dumps(json.loads(out.read_text())) == out.read_text()


def test_table1_wrong_size(capsys):
    assert main(["table1", "--sites", "6"]) == 2


def test_thermo_csv(capsys, tmp_path):
    path = tmp_path / "thermo.csv"
    code, doc, _ = run(capsys, "thermo", "--sizes", "16,512", "--out", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert tuple(rows[0].keys()) == THERMO_COLUMNS
    assert [int(r["N"]) for r in rows] == [8, 256]
    assert len(doc["results"]) == 2


def test_scaling_empty_sizes(capsys):
    assert main(["scaling", "--sizes", ""]) == 2


def test_scaling_too_large(capsys):
    assert main(["scaling", "--sizes", "8,20"]) == 2


def test_scaling_inhomogeneous_small(capsys, tmp_path):
    path = tmp_path / "inh.csv"
    code, doc, _ = run(capsys, "scaling", "--eta", "2", "--coupling", "+1", "--sizes", "4,6,8,10",
                       "--out", str(path))
    assert code == 0
    assert doc["fit"]["model"] == "C*(2N)^alpha+d"
    header = path.read_text().splitlines()[0].split(",")
    assert tuple(header) == INHOM_COLUMNS


def test_scaling_parallel_matches_serial(capsys):
    args = ["scaling", "--coupling", "-1", "--sizes", "4,6,8,10"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--workers", "2")
    assert serial["results"] == parallel["results"]


def test_strings_command(capsys):
    code, doc, _ = run(capsys, "strings")
    assert code == 0
    good = [r for r in doc["results"] if "error" not in r]
    assert min(abs(r["energy_minus_lanczos"]) for r in good) < 1e-6


def test_ground_and_bae(capsys):
    code, doc, _ = run(capsys, "ground", "--sites", "8")
    assert code == 0
    assert len(doc["results"][0]["holes"]) == 1
    code, doc, _ = run(capsys, "bae", "--b", "0.3")
    assert code == 0 and len(doc["results"]) == 16


def test_bad_params_exit_2(capsys):
    assert main(["spectrum", "--sites", "5"]) == 2
    assert main(["spectrum", "--tol", "-1"]) == 2


def test_run_config_invariants():
    p = ModelParams(4, 1.0, 0.3)
    with pytest.raises(ConfigError):
        RunConfig("verify", p, 0.0, None, 0, 1)
    with pytest.raises(ConfigError):
        RunConfig("verify", p, 1e-9, None, 0, 0)
    with pytest.raises(ConfigError):
        RunConfig("plot", p, 1e-9, None, 0, 1)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "odba_chain.cli", "spectrum"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["total"] == 16
