import json
import subprocess
import sys

import pytest

from ecsieve.census import CensusReport
from ecsieve.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--theta", "0.5")
    data = json.loads(out)
    assert code == 0
    assert data["r"] == 8
    assert abs(data["upper_constant"] - 10) <= 1e-3 + 1e-12
    assert data["conditions"] == []


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--theta", "11/21", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "field,value"
    assert "r,9" in lines


def test_gl2_count(capsys):
    code, out, _ = run(capsys, "gl2", "--count-C", "2")
    assert code == 0
    assert json.loads(out)["count_C"] == 4


def test_gl2_omega_generators(capsys, tmp_path):
    gens = tmp_path / "gens.txt"
    gens.write_text("# GL2(Z/2)\n1,1;0,1\n0,1;1,0\n")
    code, out, _ = run(capsys, "gl2", "--omega", "--me", "2", "--image", f"gens:{gens}")
    data = json.loads(out)["omega"]
    assert code == 0
    assert data["group_order"] == 6 and data["prob_coprime"] == "1/3"


def test_constant(capsys):
    code, out, _ = run(capsys, "constant", "--cutoff", "1000")
    data = json.loads(out)
    assert code == 0
    assert 0.4 < data["value"] < 0.6 and data["tail_bound"] > 0
    code, out, _ = run(capsys, "constant", "--classical", "--cutoff", "3")
    assert json.loads(out)["value"] == 1.5


def test_census_example(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "census", "--curve", "0,0,1,-1,0", "--x", "1000", "--me", "1",
                     "--out", str(out_path))
    assert code == 0
    report = CensusReport.from_json(out_path.read_text())
    assert report.n_good_primes == 167
    assert report.to_json() == out_path.read_text()

    code, out, _ = run(capsys, "plot-data", str(out_path))
    assert code == 0
    assert out.splitlines()[0] == "x,pi_twin,prediction,ratio"
    assert len(out.splitlines()) == 2


def test_byte_identical_outputs(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(capsys, "census", "--curve", "0,0,1,-1,0", "--x", "5000", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_overridden_by_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# census defaults\ncurve = 0,0,1,-1,0\nx = 5000\n")
    code, out, _ = run(capsys, "census", "--config", str(cfg), "--x", "1000")
    assert code == 0
    assert json.loads(out)["x"] == 1000
    code, out, _ = run(capsys, "census", "--config", str(cfg))
    assert json.loads(out)["x"] == 5000


@pytest.mark.parametrize("argv", [
    ["bounds", "--theta", "0.2"],
    ["bounds", "--theta", "abc"],
    ["census", "--x", "1000"],
    ["census", "--curve", "0,0,1,-1,0", "--x", "10"],
    ["census", "--curve", "1,2", "--x", "1000"],
    ["gl2"],
    ["gl2", "--omega", "--image", "gens:/nonexistent"],
    ["nosuchcommand"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.strip()


def test_computation_errors_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "gl2", "--order", "1000000")
    assert code == 1 and err.startswith("OverflowError")
    gens = tmp_path / "gens.txt"
    gens.write_text("2,0;0,1\n")
    code, _, err = run(capsys, "gl2", "--omega", "--me", "4", "--image", f"gens:{gens}")
    assert code == 1 and err.startswith("NotInvertible")
    report = tmp_path / "r.json"
    report.write_text(json.dumps({"x": 1}))
    code, _, err = run(capsys, "plot-data", str(report))
    assert code == 1 and err.startswith("MissingCheckpoints")


def test_cap_exceeded_exit_1(capsys, monkeypatch):
    from ecsieve import cli, gl2
    monkeypatch.setattr(cli, "count_C", lambda n: gl2.count_C(n, "brute"))
    code, _, err = run(capsys, "gl2", "--count-C", "401")
    assert code == 1 and err.startswith("CapExceeded")


def test_checkpoint_resume_via_cli(tmp_path, capsys):
    ck = tmp_path / "run.ck"
    base = ["census", "--curve", "0,0,1,-1,0", "--x", "20000", "--interval", "4096"]
    assert run(capsys, *base, "--checkpoint", str(ck), "--max-blocks", "2")[0] == 0
    _, resumed, _ = run(capsys, *base, "--checkpoint", str(ck))
    _, straight, _ = run(capsys, *base)
    assert resumed == straight


def test_verify(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert "FAIL" not in out


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "ecsieve.cli", "gl2", "--count-C", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count_C"] == 21
