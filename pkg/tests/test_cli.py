import json
import subprocess
import sys

import pytest

from coulomb_ot.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_energy_uniform_json(capsys):
    code, out, _ = _run(capsys, "energy", "--density", "uniform1d")
    assert code == 0
    data = json.loads(out)
    assert data["e_ot"] == pytest.approx(2.0, abs=1e-6) and data["lda"] is None


def test_radial_map_csv(tmp_path, capsys):
    path = tmp_path / "g.csv"
    code, _, _ = _run(capsys, "radial-map", "--density", "exponential", "--n", "64", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "r,g" and len(lines) > 64
    rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
    assert all(g < 0 for _, g in rows)
    assert all(b[1] > a[1] for a, b in zip(rows, rows[1:]))


def test_map1d_and_plan(capsys):
    code, out, _ = _run(capsys, "map1d", "--density", "uniform1d", "--n", "16")
    assert code == 0 and out.splitlines()[0] == "x,T"
    problem = json.dumps({"cost": "coulomb", "mu": [[0, 1], [1, 1]]})
    code, out, _ = _run(capsys, "plan", "--density", problem, "--format", "json")
    assert code == 0 and json.loads(out)["cost"] == pytest.approx(2.0)


def test_bounds_reinstate_mollify(capsys):
    code, out, _ = _run(capsys, "bounds", "--density", "crossing-a", "--target", "crossing-b", "--n", "64")
    assert code == 0
    data = json.loads(out)["continuity"]
    assert data["holds"] is True and set(data) >= {"gap", "bound_M", "bound_cstar"}
    target = json.dumps({"kind": "grid", "samples": [[0, 1], [1, 2]]})
    code, out, _ = _run(capsys, "reinstate", "--density", "uniform1d", "--target", target, "--n", "16")
    data = json.loads(out)
    assert code == 0 and data["marginal_error"] <= 1e-10 and data["cost_reinstated"] is None
    # uniform [0,1] sits on two nodes of the shared [-5,5] grid, so no finite plan exists
    code, _, err = _run(capsys, "reinstate", "--density", "uniform1d", "--target", "gaussian1d", "--n", "16")
    assert code == 2 and err.startswith("error:")
    code, _, _ = _run(capsys, "mollify", "--density", "uniform1d", "--eps", "0.1", "--beta", "0.1", "--n", "16")
    assert code == 0


def test_verify_suite_exit_zero(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "legendre")
    assert code == 0
    checks = json.loads(out)["checks"]
    assert checks and all(c["passed"] for c in checks)


@pytest.mark.parametrize(
    "argv",
    [
        ["map1d"],
        ["energy", "--density", "uniform1d", "--n", "4"],
        ["mollify", "--density", "uniform1d"],
        ["mollify", "--density", "uniform1d", "--eps", "-1"],
        ["energy", "--density", "nope"],
        ["energy", "--density", "uniform1d", "--format", "xml"],
        ["frobnicate"],
    ],
)
def test_validation_errors_exit_two(argv, capsys, tmp_path):
    out_file = tmp_path / "out.csv"
    code, _, err = _run(capsys, *argv, *(["--out", str(out_file)] if argv[0] != "frobnicate" else []))
    assert code == 2
    assert len(err.strip().splitlines()) == 1
    assert not out_file.exists()


def test_io_error_exit_three(capsys, tmp_path):
    code, _, err = _run(capsys, "energy", "--density", "uniform1d", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == 3 and "error" in err
    code, _, _ = _run(capsys, "energy", "--density", str(tmp_path / "absent.json"))
    assert code in (2, 3)


def test_byte_identical_output(tmp_path):
    outputs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        subprocess.run(
            [sys.executable, "-m", "coulomb_ot.cli", "radial-map", "--density", "gaussian", "--n", "32", "--out", str(path)],
            check=True,
        )
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    fields = [f for line in outputs[0].decode().splitlines()[1:] for f in line.split(",")]
    digits = [f.split("e")[0].replace("-", "").replace(".", "").lstrip("0") for f in fields]
    assert max(len(d) for d in digits) <= 12
