import csv
import io
import json
import math

import pytest

from phasebound.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def csv_rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(body))


def test_kernel():
    code, out, _ = call("kernel", "--max-lag", "4")
    assert code == 0
    vals = [float(r["theta_k"]) for r in csv_rows(out)]
    assert vals == pytest.approx([math.pi**2 / 3, -2, 0.5, -2 / 9, 0.125], rel=1e-15)


def test_provenance_header():
    _, out, _ = call("kernel", "--max-lag", "1", "--seed", "17")
    lines = out.splitlines()
    assert lines[0].startswith("# phasebound")
    config = json.loads(lines[1].split(":", 1)[1])
    assert config["max_lag"] == 1 and config["seed"] == 17
    assert lines[2] == "# seed: 17"


def test_noon():
    code, out, _ = call("noon", "--n", "100", "--eps", "0.1")
    row = csv_rows(out)[0]
    assert float(row["lower_bound"]) == pytest.approx(8.8826e-3, abs=1e-7)
    assert float(row["C"]) == pytest.approx(math.pi**2 / 3 - 5e-5, abs=1e-12)


def test_optimize_max():
    code, out, _ = call("optimize", "--constraint", "max", "--E", "64", "--format", "csv")
    row = csv_rows(out)[0]
    assert set(row) >= {"E", "C", "E2C", "residual"}
    assert abs(float(row["E2C"]) / (math.pi**2 / 4) - 1) < 0.1


def test_sweep_max():
    code, out, _ = call("sweep", "--bound", "max", "--E", "8,16,32,64,128,256")
    gaps = [float(r["rel_gap"]) for r in csv_rows(out)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_sweep_avg_threads(monkeypatch):
    monkeypatch.setenv("PHASEBOUND_THREADS", "2")
    code, out, _ = call("sweep", "--bound", "avg", "--E", "8,16,32", "--trunc-factor", "8")
    rows = csv_rows(out)
    assert code == 0
    assert float(rows[-1]["E2C"]) == pytest.approx(0.25, rel=0.1)


def test_sweep_noon_gnuplot():
    code, out, _ = call("sweep", "--noon", "--n", "1,2,4,8,16", "--gnuplot")
    data = [line.split() for line in out.splitlines() if not line.startswith("#")]
    assert len(data) == 5
    for n, v in data:
        assert float(v) == pytest.approx(math.pi**2 / 3 * int(n) ** 2 - 0.5, rel=1e-12)


def test_sweep_requires_ascending():
    code, _, err = call("sweep", "--bound", "max", "--E", "8,4")
    assert code == 2 and "ascending" in err


def test_state_roundtrip(tmp_path):
    path = tmp_path / "state.json"
    code, out, _ = call("optimize", "--constraint", "max", "--E", "7", "--emit-state", str(path))
    c_opt = float(csv_rows(out)[0]["C"])
    data = json.loads(path.read_text())
    assert set(data) == {"lo", "hi", "amplitudes"}
    code, out, _ = call("mse", "--state-file", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["rows"][0]["mse"] == pytest.approx(c_opt, abs=1e-12)


def test_state_roundtrip_builder(tmp_path):
    path = tmp_path / "s.json"
    _, out1, _ = call("mse", "--state", "coherent", "--alpha", "1.5", "--emit-state", str(path))
    _, out2, _ = call("mse", "--state-file", str(path))
    assert float(csv_rows(out1)[0]["mse"]) == pytest.approx(float(csv_rows(out2)[0]["mse"]), abs=1e-12)


def test_unnormalized_state_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"lo": 0, "hi": 1, "amplitudes": [[1, 0], [1, 0]]}))
    code, _, err = call("mse", "--state-file", str(path))
    assert code == 2 and "normalized" in err


def test_unknown_flag(capsys):
    code, _, _ = call("kernel", "--bogus")
    assert code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_command(capsys):
    assert call("frobnicate")[0] == 2


def test_numerical_failure():
    code, _, err = call("optimize", "--constraint", "avg", "--E", "10", "--trunc-factor", "1")
    assert code == 1 and "numerical failure" in err


def test_missing_state_args():
    assert call("mse", "--state", "noon")[0] == 2


def test_fisher():
    _, out, _ = call("fisher", "--state", "noon", "--n", "5")
    row = csv_rows(out)[0]
    assert float(row["j"]) == pytest.approx(100)
    assert float(row["lub_bound_max"]) == pytest.approx(0.01)


def test_mse_oracle_column():
    _, out, _ = call("mse", "--state", "sine", "--E", "10", "--oracle")
    row = csv_rows(out)[0]
    assert float(row["mse"]) == pytest.approx(float(row["quadrature"]), abs=1e-10)


def test_continuum():
    _, out, _ = call("continuum", "--profile", "dirichlet", "--M", "401")
    assert float(csv_rows(out)[0]["eigenvalue"]) == pytest.approx(math.pi**2 / 4, rel=5e-4)
    _, out, _ = call("continuum", "--profile", "gaussian", "--E", "16,32")
    assert float(csv_rows(out)[-1]["rel_gap"]) < 0.03


def test_simulate_deterministic(tmp_path):
    args = ("simulate", "--state", "noon", "--n", "1", "--count", "2000", "--seed", "5", "--format", "json")
    a, b = call(*args), call(*args)
    assert a[1] == b[1]
    row = json.loads(a[1])["rows"][0]
    assert abs(row["z"]) < 4


def test_simulate_plateau_and_output_file(tmp_path):
    path = tmp_path / "plateau.csv"
    code, out, _ = call("simulate", "--plateau", "--n-list", "100", "--eps", "0.1", "--count", "500", "-o", str(path))
    assert code == 0 and out == ""
    rows = csv_rows(path.read_text())
    assert rows[0]["state"] == "noon"


def test_twostep():
    _, out, _ = call("twostep", "--E-total", "64", "--split", "0.25", "--trials", "2000", "--format", "json")
    rep = json.loads(out)["rows"][0]
    assert rep["E1"] == 16 and rep["E2"] == 48
