import csv
import json
import math

import numpy as np
import pytest

from voigt_strip.cli import EXIT_FAIL, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main, spec_from_args
from voigt_strip.green import green_eval
from voigt_strip.io import config_hash, file_hash, read_field_csv
from voigt_strip.modal import kernel_h, mode_params
from voigt_strip.model import StripConfig

SMALL_SWEEP = ["--epsilons", "0.2,0.1", "--nx", "9", "--nt", "21", "--green-nx", "5", "--green-nt", "8"]


def write_problem(tmp_path, doc):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


ZERO = {"epsilon": 0.1, "c": 1.0, "l": math.pi, "t_max": 1.0, "f0": [[1, 0.0]]}


def test_simulate_zero_problem(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", write_problem(tmp_path, ZERO), "-o", str(out), "--nx", "5", "--nt", "4"]) == EXIT_OK
    for name in ("u", "w", "r", "F"):
        data = read_field_csv(out / f"{name}.csv")
        assert data.shape == (20, 3) and np.all(data[:, 2] == 0.0)
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["artifacts"]) == {"u.csv", "w.csv", "r.csv", "F.csv"}


def test_simulate_csv_layout(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "-o", str(out), "--nx", "3", "--nt", "2"]) == EXIT_OK
    raw = (out / "u.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["x", "t", "value"]
    # rows ordered by t, then x
    assert [float(r[1]) for r in rows[1:]] == [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
    # built-in problem: f1 = sin x, so u(pi/2, t) = H_1(t)
    h1 = kernel_h(mode_params(StripConfig(0.1, 1.0, math.pi), 1), 1.0).h
    assert float(rows[2][2]) == 0.0 and float(rows[5][2]) == pytest.approx(h1, rel=1e-15)


def test_manifest_traces_artifacts(tmp_path):
    out = tmp_path / "out"
    main(["simulate", "-o", str(out), "--nx", "5", "--nt", "5", "--epsilon", "0.2"])
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["epsilon"] == 0.2
    assert m["overrides"] == {"epsilon": 0.2, "nt": 5, "nx": 5}
    assert m["config_sha256"] == config_hash({"config": m["config"], "options": m["options"]})
    for name, digest in m["artifacts"].items():
        assert file_hash(out / name) == digest
    assert m["quadrature"]["max"] >= 0.0


def test_verify_r_rejects_alpha(tmp_path, capsys):
    assert main(["verify-r", "-o", str(tmp_path), "--alpha", "0.6"]) == EXIT_VALIDATION
    assert "3/4 < alpha < 1" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["simulate", "--nx", "1"],
    ["oracle-compare", "--courant", "0"],
    ["green", "--t=-1"],
])
def test_validation_exit_code(tmp_path, argv):
    assert main(argv + ["-o", str(tmp_path)]) == EXIT_VALIDATION


def test_bad_problem_file(tmp_path):
    bad = write_problem(tmp_path, {"epsilon": -1.0, "c": 1.0, "l": 1.0, "t_max": 1.0})
    assert main(["simulate", bad, "-o", str(tmp_path / "o")]) == EXIT_VALIDATION
    missing = str(tmp_path / "nope.json")
    assert main(["simulate", missing, "-o", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_truncation_failure_is_numerical(tmp_path):
    argv = ["green", "-o", str(tmp_path), "--t", "1e-4", "--mode-cap", "10"]
    assert main(argv) == EXIT_NUMERICAL


def test_green_output_matches_library(tmp_path):
    assert main(["green", "-o", str(tmp_path), "--x", "0.3,1.1", "--xi", "2.0", "--t", "0.05,0.5"]) == EXIT_OK
    rows = np.loadtxt(tmp_path / "green.csv", delimiter=",", skiprows=1)
    cfg = StripConfig(0.1, 1.0, math.pi, 1.0)
    assert rows.shape == (4, 6)
    for x, xi, t, value, tail, _ in rows:
        ref, trunc = green_eval(cfg, x, xi, t)
        assert abs(value - ref) <= 2e-10
        assert tail <= 1e-10


def test_split_outputs(tmp_path):
    assert main(["split", "-o", str(tmp_path), "--t", "0.2"]) == EXIT_OK
    g1 = np.loadtxt(tmp_path / "G1.csv", delimiter=",", skiprows=1)
    g2 = np.loadtxt(tmp_path / "G2.csv", delimiter=",", skiprows=1)
    main(["green", "-o", str(tmp_path / "g"), "--t", "0.2"])
    g = np.loadtxt(tmp_path / "g" / "green.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(g1[:, 3] + g2[:, 3], g[:, 3], rtol=0, atol=1e-15)


def test_oracle_compare_orders(tmp_path):
    assert main(["oracle-compare", "-o", str(tmp_path), "--nx", "17", "--levels", "3"]) == EXIT_OK
    rows = np.genfromtxt(tmp_path / "oracle_compare.csv", delimiter=",", skip_header=1)
    assert np.all((rows[1:, 5] >= 1.8) & (rows[1:, 5] <= 2.2))


def test_sweep_report_structure(tmp_path):
    code = main(["sweep", "-o", str(tmp_path)] + SMALL_SWEEP)
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert code in (EXIT_OK, EXIT_FAIL)
    assert (code == EXIT_OK) == all(v == "PASS" for v in doc["verdicts"].values())
    assert doc["epsilons"] == [0.2, 0.1]
    assert set(doc["regression"]) == {"slope", "intercept"}
    assert [set(r) for r in doc["records"]] == [{"epsilon", "sup_r", "norm_F", "k_const", "a0", "m0", "c1"}] * 2
    header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
    assert header == "epsilon,sup_r,norm_F,k_const,a0,m0,c1"


def test_sweep_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["sweep", "-o", str(a)] + SMALL_SWEEP)
    main(["sweep", "-o", str(b)] + SMALL_SWEEP)
    for name in ("sweep.json", "sweep.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_json_is_sorted_utf8(tmp_path):
    main(["verify-r", "-o", str(tmp_path), "--nx", "9", "--nt", "21"])
    text = (tmp_path / "verify_r.json").read_text(encoding="utf-8")
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert doc["eta"] == pytest.approx(0.05, rel=1e-12)


def test_overrides_parsed():
    spec = spec_from_args(["sweep", "--epsilons", "0.3,0.2", "--gamma", "0.9"])
    assert spec.overrides == {"epsilons": [0.3, 0.2], "gamma": 0.9}
    assert spec.option("alpha") == 0.9
