import json
import subprocess
import sys

import pytest

from absim.cli import identity_checks, main


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_run_writes_json(tmp_path, capsys):
    cfg = _write(tmp_path, "a.cfg", "scenario = double_mzi\nflux = pi\ntrials = 500\n")
    assert main(["run", cfg]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["trials"] == 500 and d["config"]["flux"] == pytest.approx(3.141592653589793)


def test_run_overrides_and_csv(tmp_path):
    cfg = _write(tmp_path, "a.cfg", "scenario = single_mzi\nflux = 0.3\n")
    out, csv = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["run", cfg, "--seed", "9", "--trials", "300", "--out", str(out), "--csv", str(csv)]) == 0
    d = json.loads(out.read_text())
    assert d["config"]["seed"] == 9 and d["trials"] == 300
    assert len(csv.read_text().splitlines()) == 301


def test_workers_do_not_change_bytes(tmp_path):
    cfg = _write(tmp_path, "a.cfg", "scenario = double_mzi\nflux = pi/2\ntrials = 5000\nrepetitions_per_trial = 2\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", cfg, "--out", str(a)]) == 0
    assert main(["run", cfg, "--out", str(b), "--workers", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "text",
    ["scenario = single_mzi\ntrials = 0\n", "scenario = single_mzi\nbogus = 1\n", "scenario = single_mzi\nno equals here\n"],
)
def test_bad_config_exit_code(tmp_path, capsys, text):
    assert main(["run", _write(tmp_path, "bad.cfg", text)]) == 2
    assert "absim:" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2


def test_zero_postselection_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "z.cfg", "scenario = kicked_qubit\nv0 = pi\ng0 = 0\npostselect = sx+\ntrials = 200\n")
    assert main(["run", cfg]) == 3
    assert "ZeroPostselection" in capsys.readouterr().err


def test_check_passes(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == len(list(identity_checks())) and "FAIL" not in out


def test_scaling_table(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["scaling", "--g0", "0.3", "--n", "4,16", "--trials", "500", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert len(text.strip().splitlines()) == 3
    rows = json.loads(out.read_text())["rows"]
    assert [r["N"] for r in rows] == [4, 16]


def test_scaling_bad_n():
    assert main(["scaling", "--g0", "0.3", "--n", "16,4"]) == 2
    assert main(["scaling", "--g0", "0.3", "--n", "a,b"]) == 2


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "a.cfg", "scenario = lattice_check\nsites = 8\nsteps = 2\ntrials = 3\n")
    res = subprocess.run([sys.executable, "-m", "absim.cli", "run", cfg], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["lattice"]["passed"] is True
