import json
import subprocess
import sys

import pytest

from polyhho.cli import main, parse_levels
from polyhho.study import read_csv


def test_parse_levels():
    assert parse_levels("1..4") == (1, 2, 3, 4)
    assert parse_levels("0,2") == (0, 2)


def test_solve_writes_csv_and_plotdata(tmp_path, capsys):
    out, plot = tmp_path / "r.csv", tmp_path / "r.json"
    code = main(
        ["solve", "--problem", "quasilinear", "--family", "cartesian", "--degree", "0", "--levels", "0..1",
         "--tol", "1e-10", "--out", str(out), "--plotdata", str(plot)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "family,k,level,h,ndof,error,rate"
    assert len(lines) == 3
    assert read_csv(out).rows[1].rate > 0.5
    assert json.loads(plot.read_text())["series"][0]["k"] == 0
    assert "iters=" in capsys.readouterr().out


def test_solve_on_mesh_file(tmp_path):
    mesh = tmp_path / "k.mesh"
    assert main(["mesh", "--family", "kershaw", "--level", "0", "--out", str(mesh)]) == 0
    out = tmp_path / "r.csv"
    assert main(["solve", "--problem", "poisson", "--mesh", str(mesh), "--degree", "1", "--out", str(out)]) == 0
    row = read_csv(out).rows[0]
    assert row.family == "file" and row.error <= 1e-9


def test_unconverged_iteration_exits_2(tmp_path, capsys):
    code = main(
        ["solve", "--problem", "quasilinear", "--family", "triangular", "--degree", "1", "--levels", "1..1",
         "--max-iter", "1", "--out", str(tmp_path / "r.csv")]
    )
    assert code == 2
    assert "did not reach" in capsys.readouterr().err


def test_errors_exit_1(tmp_path, capsys):
    assert main(["solve", "--mesh", str(tmp_path / "missing.mesh"), "--out", str(tmp_path / "r.csv")]) == 1
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--family", "voronoi", "--out", str(tmp_path / "r.csv")])
    assert exc.value.code == 1
    assert main(["solve", "--levels", "3..1", "--out", str(tmp_path / "r.csv")]) == 1
    assert "ascending" in capsys.readouterr().err


def test_check_subcommand_runs_as_module():
    proc = subprocess.run([sys.executable, "-m", "polyhho", "check"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 4 and all(line.startswith("[PASS]") for line in lines)
