import csv
import json

import numpy as np
import pytest

import latsel


def test_penalties():
    assert latsel.penalty_value("range", 3, 1.0, [0, 2]) == 6.0
    assert latsel.penalty_value("interval", 5, 1.0, [0, 1, 3]) == 5.0
    assert latsel.lovasz_extension("range", 1.0, np.array([0.9, 0.1, 0.4])) == pytest.approx(4.0)


def test_solvers_agree():
    inst = latsel.make_instance("regression", 10, seed=2)
    exact = latsel.solve(inst, "bruteforce")
    mn = latsel.solve(inst, "minnorm", tol=1e-10, max_iter=1000)
    pgd = latsel.solve(inst, "pgd", max_iter=2000)
    assert mn["support"] == exact["support"]
    assert mn["objective"] == pytest.approx(exact["objective"], abs=1e-9)
    assert pgd["objective"] == pytest.approx(exact["objective"], abs=1e-6)
    q = np.asarray(inst.Q)
    x = mn["x"]
    assert x @ q @ x + inst.p @ x + inst.offset + inst.g(mn["support"]) == pytest.approx(mn["objective"])


def test_project_simplex():
    np.testing.assert_allclose(latsel.project_simplex(np.array([2.0, 0.5, 0.5])), [1.0, 0.0, 0.0])


def test_run_experiment(tmp_path):
    cfg = {"n": 8, "repeats": 1, "solvers": ["minnorm", "pgd"], "output_dir": str(tmp_path)}
    out = latsel.run_experiment(json.dumps(cfg))
    assert out["converged"]
    with open(tmp_path / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["solver"] for r in rows] == ["minnorm", "pgd"]
    assert rows[0]["support"] == rows[1]["support"]
    assert rows[0]["support"].startswith("0x")


def test_bad_config():
    with pytest.raises(ValueError):
        latsel.run_experiment(json.dumps({"bogus": 1}))
