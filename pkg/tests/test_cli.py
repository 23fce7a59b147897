import json
import subprocess
import sys
from pathlib import Path

import pytest

from wavenet import cli

ROOT = Path(__file__).resolve().parents[1]
INST = ROOT / "instances"


def run(*args):
    return cli.main([str(a) for a in args])


def test_npp_n20_instance(tmp_path, capsys):
    assert run("solve", INST / "npp_n20.toml", "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["d_min"] == 0
    assert sum(rep["subset_a"]) == sum(rep["subset_b"]) == 401
    assert rep["oracle"]["match"] is True
    assert [set(e) for e in rep["epochs"]][0] >= {"merged_weight", "peak_present"}
    assert "timing" not in rep
    assert set(json.loads((tmp_path / "timing.json").read_text())) >= {"wave", "oracle"}


def test_kp_toy(tmp_path):
    assert run("solve", INST / "kp_toy.toml", "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert (rep["v_max"], rep["items"], rep["arrival"]) == (7, [0, 1], 4)
    csv = (tmp_path / "timefreq.csv").read_text().splitlines()
    assert csv == ["window_start,freq,magnitude", "0,0,1", "2,4,1", "4,7,1", "6,11,1"]


def test_npp_export_is_one_frame(tmp_path):
    run("solve", INST / "npp_toy.toml", "--out", tmp_path)
    rows = (tmp_path / "timefreq.csv").read_text().splitlines()[1:]
    assert {r.split(",")[0] for r in rows} == {"0"}
    assert {int(r.split(",")[1]) for r in rows} == {-8, -2, 2, 8}


def test_tsp_fault_injection(tmp_path, capsys):
    assert run("solve", INST / "tsp_n6.toml", "--out", tmp_path, "--inject-oracle-mismatch") == 2
    assert "mismatch" in capsys.readouterr().err


def test_tsp_report_fields(tmp_path):
    assert run("solve", INST / "tsp_n6.toml", "--out", tmp_path, "--cross-check") == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["d_opt"] == rep["t_0"] == rep["oracle"]["optimum"]
    assert set(rep["plan"]) >= {"omegas", "omega_sum", "revisit_bound"}
    assert len(rep["cross_check"]) == 2


def test_usage_and_parse_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        run("solve")
    assert err.value.code == 1
    bad = tmp_path / "bad.toml"
    bad.write_text('problem = "npp"\nweights = [3, 0]\n')
    assert run("solve", bad, "--out", tmp_path) == 1
    assert "w_j >= 1" in capsys.readouterr().err
    assert run("solve", tmp_path / "missing.toml", "--out", tmp_path) == 1
    assert run("solve", INST / "kp_toy.toml", "--sample-rate", "3", "--out", tmp_path) == 1
    assert run("solve", INST / "kp_toy.toml", "--threshold", "0", "--out", tmp_path) == 1


def test_internal_error_exit_3(tmp_path, capsys):
    # a threshold above every line leaves no peak to read
    assert run("solve", INST / "npp_toy.toml", "--threshold", "5", "--out", tmp_path) == 3
    assert "NoPeakFound" in capsys.readouterr().err


def test_no_oracle(tmp_path):
    assert run("solve", INST / "kp_n10.toml", "--no-oracle", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "report.json").read_text())["oracle"] is None


def test_oracle_command(capsys):
    assert run("oracle", INST / "kp_toy.toml") == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"problem": "knapsack", "optimum": 7, "witness": [0, 1], "method": "dynamic_programming"}


def test_export(tmp_path):
    run("solve", INST / "kp_toy.toml", "--out", tmp_path)
    target = tmp_path / "again.csv"
    assert run("export", tmp_path / "report.json", "--what", "timefreq", "--out", target) == 0
    assert target.read_bytes() == (tmp_path / "timefreq.csv").read_bytes()


def test_export_empty_map(tmp_path):
    rep = tmp_path / "r.json"
    rep.write_text(json.dumps({"timefreq": {"rows": []}}))
    assert run("export", rep) == 0
    assert (tmp_path / "timefreq.csv").read_text() == "window_start,freq,magnitude\n"


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVENET_OUT", str(tmp_path / "env"))
    assert run("solve", INST / "npp_toy.toml") == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_no_temp_files_left(tmp_path):
    run("solve", INST / "kp_toy.toml", "--out", tmp_path)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json", "timefreq.csv", "timing.json"]


def test_console_script(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "wavenet.cli", "oracle", str(INST / "npp_toy.toml")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["optimum"] == 2
