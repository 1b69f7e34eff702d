import json
import math

import numpy as np
import pytest

import nehari


def test_weight_and_mesh():
    w = nehari.Weight(2, 0.25)
    assert w.kappa == 2
    assert [round(i.left, 12) for i in w.intervals] == [0.125, 0.625]
    assert w(0.25) == 0.0
    assert w(0.5) == 1.0
    m = nehari.uniform_mesh(9)
    assert m.interior == 9
    assert np.allclose(m.nodes, np.linspace(0, 1, 11))
    with pytest.raises(nehari.NehariError):
        nehari.Weight(1, 1.5)


def test_eigenvalue_and_newton():
    d = nehari.Discretization(nehari.Weight(1, 0.1, 1.0), 200)
    lam1 = d.principal_eigenvalue()
    assert lam1 == pytest.approx(nehari.toeplitz_eigenvalue(200, 1), rel=1e-9)
    assert lam1 < math.pi**2

    lam = 5.0
    r = nehari.newton(d, lam, nehari.sine_seed(d, nehari.sine_amplitude(d, lam)))
    assert r["converged"]
    assert np.linalg.norm(d.residual(lam, r["u"])) < 1e-4
    assert r["u"].min() > 0.0

    zero = nehari.newton(d, lam, np.zeros(d.size))
    assert zero["converged"] and zero["iterations"] <= 1


def test_shooting_and_census_agree():
    w = nehari.Weight(1, 0.5)
    shots = nehari.shoot_count(w, -100.0)
    census = nehari.mask_census(nehari.Discretization(w, 500), -100.0)
    assert shots["count"] == 3
    assert len(census) == 3
    assert sorted(e["mask"] for e in census) == ["01", "10", "11"]
    for s in shots["solutions"]:
        assert s["x"][0] == 0.0 and s["x"][-1] == pytest.approx(1.0)
    assert nehari.shoot_count(nehari.Weight(1, 0.1, 1.0), 15.0)["count"] == 0


def test_time_map_bound():
    for lam in (-1.0, -10.0):
        u0 = 1.5 * math.sqrt(-2 * lam)
        assert nehari.time_map(u0, lam) < nehari.time_map_bound(u0, lam)


def test_diagram_pipeline(tmp_path):
    b = nehari.run_diagram({"kappa": 1, "h": 0.05, "continuation": {"lambda_min": -100}})
    roles = sorted(br["role"] for br in b.branches)
    assert roles == ["main", "switched", "switched"]
    pitchforks = [e for e in b.events if e["kind"] == "pitchfork"]
    assert len(pitchforks) == 1
    assert abs(pitchforks[0]["lambda_b"] + 12.40637) <= 5e-2
    assert b.validate() < 1e-4
    assert b.branches_csv().startswith("branch_id,point_index,lambda,l2_norm,tag\n")
    assert json.loads(b.config_json())["h"] == 0.05

    b.write(tmp_path)
    for name in ("bundle.json", "branches.csv", "events.jsonl", "diagram.svg"):
        assert (tmp_path / name).exists()
    assert (tmp_path / "profiles" / "main_0.txt").exists()
    assert b.svg() == nehari.run_diagram(b.config_json()).svg()


def test_config_errors():
    with pytest.raises(nehari.NehariError):
        nehari.run_diagram({"no_such_key": 1})
    defaults = json.loads(nehari.default_config())
    assert defaults["mesh"]["n"] == 500
    assert defaults["continuation"]["newton"]["tol"] == 1e-4


def test_h_sweep_sign_change():
    rows = dict(nehari.run_h_sweep({"continuation": {"lambda_min": -50}}, [0.1, 0.3]))
    assert rows[0.1] < 0.0 < rows[0.3]
