import csv
import io
import json
import shutil
import subprocess

import numpy as np
import pytest

from miopbd import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


# ---------------------------------------------------------------- exit codes

def test_verify_all_ok(capsys):
    code, doc = run_json(capsys, "verify", "--family", "H", "--D", "2")
    assert code == cli.EXIT_OK
    assert doc["suite"] == "all"
    prefixes = {c["name"].split(".")[0] for c in doc["checks"]}
    assert prefixes >= {"spectral", "orthogonality", "conservation", "shifts", "zeros", "repeated"}
    assert all(c["pass"] for c in doc["checks"])


def test_verify_failure_exit(capsys):
    code, doc = run_json(capsys, "verify", "--family", "H", "--D", "2", "--suite", "spectral",
                         "--tol", "eigen=1e-300")
    assert code == cli.EXIT_FAIL
    failed = [c for c in doc["checks"] if not c["pass"]]
    assert failed and all(c["tolerance"] == 1e-300 for c in failed)


@pytest.mark.parametrize("argv", [
    ["verify", "--family", "H", "--params", "b=2.5", "--D", "2"],
    ["verify", "--family", "H", "--D", "2", "--suite", "nonsense"],
    ["verify", "--family", "H", "--params", "zz=1"],
    ["verify", "--family", "H", "--tol", "eigen=abc"],
])
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert err.strip()


def test_bad_json_reports_position(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"family": "H",\n  "D": [2,]\n}')
    code, _, err = run(capsys, "verify", "--config", str(path))
    assert code == cli.EXIT_CONFIG
    assert f"{path}:2:" in err


@pytest.mark.parametrize("argv", [
    ["evolve", "--family", "qM", "--mode", "ct", "--t-end", "1"],
    ["evolve", "--family", "M", "--mode", "dt", "--steps", "3"],
    ["eval", "poly", "--family", "H", "--D", "2", "--n", "11"],
    ["eval", "xi", "--family", "H", "--D", "2", "--x", "12"],
])
def test_domain_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == cli.EXIT_DOMAIN


def test_qM_verify_domain(capsys):
    code, doc = run_json(capsys, "verify", "--family", "qM", "--suite", "conservation")
    assert code == cli.EXIT_DOMAIN
    assert "error" in doc


# ---------------------------------------------------------------- output schema

def test_verify_schema(capsys):
    code, doc = run_json(capsys, "verify", "--family", "qR", "--D", "1,3", "--suite", "orthogonality")
    assert code == 0
    assert set(doc) >= {"suite", "checks", "config", "version"}
    assert doc["config"]["family"] == "qR" and doc["config"]["D"] == [1, 3]
    for c in doc["checks"]:
        assert set(c) == {"name", "residual", "tolerance", "pass"}
        assert isinstance(c["pass"], bool)


def test_csv_round_trip(capsys):
    code, out, _ = run(capsys, "eval", "poly", "--family", "H", "--D", "2", "--n", "0:3",
                       "--format", "csv")
    assert code == 0
    head, rows = read_csv(out)
    assert head == ["n", "x", "P"]
    _, doc = run_json(capsys, "eval", "poly", "--family", "H", "--D", "2", "--n", "0:3")
    assert np.array_equal(np.array(rows), np.array(doc["rows"], dtype=float))


def test_eval_consistency(capsys):
    _, poly = run_json(capsys, "eval", "poly", "--family", "H", "--D", "2", "--n", "0")
    _, xi = run_json(capsys, "eval", "xi", "--family", "H", "--D", "2")
    p0 = np.array([r[2] for r in poly["rows"]])
    shifted = np.array([r[2] for r in xi["rows"]])
    assert np.max(np.abs(p0 - shifted)) < 1e-10
    assert xi["rows"][0][1] == 1.0
    _, en = run_json(capsys, "eval", "energy", "--family", "H", "--D", "2", "--n", "0:4")
    E = [r[1] for r in en["rows"]]
    assert E[0] == 0.0 and np.all(np.diff(E) > 0)
    _, pot = run_json(capsys, "eval", "potentials", "--family", "H", "--D", "2")
    B = np.array([r[1] for r in pot["rows"]])
    D = np.array([r[2] for r in pot["rows"]])
    assert D[0] == 0.0 and B[-1] == 0.0
    assert np.all(B[:-1] > 0) and np.all(D[1:] > 0)


# ---------------------------------------------------------------- evolve and simulate

def test_evolve_stationary_constant(capsys):
    code, doc = run_json(capsys, "evolve", "--family", "H", "--D", "2", "--mode", "ct",
                         "--P0", "stationary", "--t-end", "3", "--snapshots", "4")
    assert code == 0
    P = np.array([r[3:] for r in doc["rows"]])
    assert np.max(np.abs(P - P[0])) < 1e-12
    assert all(abs(r[1] - 1.0) < 1e-12 for r in doc["rows"])


def test_evolve_dt_zero_steps(capsys, tmp_path):
    p = np.arange(1.0, 12.0)
    p /= p.sum()
    path = tmp_path / "p0.txt"
    np.savetxt(path, p)
    code, doc = run_json(capsys, "evolve", "--family", "H", "--D", "2", "--mode", "dt",
                         "--P0", f"file:{path}", "--steps", "0", "--snapshots", "1")
    assert code == 0
    assert np.allclose(doc["rows"][-1][3:], p, rtol=0, atol=1e-15)


def test_evolve_repeated_meta(capsys):
    code, doc = run_json(capsys, "evolve", "--family", "H", "--D", "2", "--mode", "repeated-dt",
                         "--m", "2", "--steps", "5", "--snapshots", "2")
    assert code == 0
    meta = doc["meta"]
    assert meta["m"] == 2 and len(meta["weights"]) == 2
    kap = np.array(meta["kappa"])
    assert kap[0] == pytest.approx(1.0) and np.all(kap > -1)
    assert all(abs(r[1] - 1.0) < 1e-10 for r in doc["rows"])


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--family", "H", "--D", "2", "--mode", "ct", "--x0", "0",
            "--t-end", "1", "--trajectories", "500", "--seed", "7", "--format", "csv"]
    c1, o1, _ = run(capsys, *argv)
    c2, o2, _ = run(capsys, *argv)
    assert c1 == c2 == 0 and o1 == o2
    _, o3, _ = run(capsys, *argv[:-4], "--seed", "8", "--format", "csv")
    assert o3 != o1


def test_simulate_paths(capsys, tmp_path):
    path = tmp_path / "paths.csv"
    code, _, _ = run(capsys, "simulate", "--family", "H", "--D", "2", "--mode", "dt", "--x0", "5",
                     "--steps", "20", "--trajectories", "50", "--paths", str(path),
                     "--paths-count", "3", "--format", "csv")
    assert code == 0
    assert path.exists() and path.read_text().strip()


# ---------------------------------------------------------------- configuration

def test_tol_scale_env(capsys, monkeypatch):
    monkeypatch.setenv("MIOPBD_TOL_SCALE", "1e-300")
    code, doc = run_json(capsys, "verify", "--family", "H", "--D", "2", "--suite", "spectral")
    assert code == cli.EXIT_FAIL
    monkeypatch.setenv("MIOPBD_TOL_SCALE", "-1")
    code, _, _ = run(capsys, "verify", "--family", "H", "--D", "2", "--suite", "spectral")
    assert code == cli.EXIT_CONFIG


def test_config_list_batch(capsys, tmp_path):
    path = tmp_path / "batch.json"
    path.write_text(json.dumps([
        {"family": "H", "D": [2]},
        {"family": "qR", "params": {"b": 0.003}, "D": [1, 3]},
        {"family": "M", "D": [1]},
    ]))
    code, doc = run_json(capsys, "verify", "--config", str(path), "--suite", "orthogonality")
    assert code == 0
    assert [d["config"]["family"] for d in doc] == ["H", "qR", "M"]


def test_cli_flags_override_config(capsys, tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({"family": "H", "D": [1]}))
    _, doc = run_json(capsys, "verify", "--config", str(path), "--D", "2", "--suite", "orthogonality")
    assert doc["config"]["D"] == [2]


@pytest.mark.skipif(shutil.which("miopbd") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["miopbd", "eval", "energy", "--family", "H", "--n", "0:1",
                        "--format", "csv"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "n,E"
