import json
import math

import numpy as np
import pytest

import games_py as g


def test_lp_matches_hand_solution():
    r = g.solve(
        np.array([-1.0, -1.0]),
        np.array([[1.0, 2.0], [3.0, 1.0]]),
        ["<=", "<="],
        np.array([4.0, 6.0]),
        np.zeros(2),
        np.full(2, np.inf),
    )
    assert r["status"] == "optimal"
    assert r["objective"] == pytest.approx(-2.8)
    assert r["x"] == pytest.approx([1.6, 1.2])


def test_milp_rounds_to_integer_optimum():
    r = g.solve(
        np.array([-5.0, -4.0]),
        np.array([[6.0, 4.0], [1.0, 2.0]]),
        ["<=", "<="],
        np.array([24.0, 6.0]),
        np.zeros(2),
        np.full(2, 10.0),
        integer=[True, True],
    )
    assert r["status"] == "optimal"
    assert r["objective"] == pytest.approx(-20.0)


def test_bad_sense_raises_value_error():
    with pytest.raises(ValueError):
        g.solve(np.ones(1), np.ones((1, 1)), ["<"], np.ones(1), np.zeros(1), np.ones(1))


def test_kmedoids_line_example():
    pts = [np.array([[x]]) for x in (0.0, 1.0, 5.0, 6.0)]
    s = g.kmedoids(pts, 2)
    assert s.objective == pytest.approx(2.0)
    assert sorted(s.weights) == [2, 2]


def test_synthetic_plan_is_feasible():
    dataset, instance = g.generate_synthetic(days=4, seed=3)
    assert dataset.day_count == 4
    assert dataset.electricity(0).shape == (6, 24)
    opts = g.SolverOptions()
    opts.gap = 1e-3
    out = g.plan_and_evaluate(instance, dataset, g.kmedoids_raw(dataset, 2), opts)
    assert out["max_violation"] <= 1e-6
    assert out["full_objective"] > 0


def test_percentage_change_sign():
    assert g.percentage_change(90.0, 100.0) == pytest.approx(-10.0)
    assert g.percentage_change(0.0, 0.0) == 0.0
    assert math.isnan(g.percentage_change(1.0, 0.0))


def test_pipeline_stops_after_clustering(tmp_path):
    cfg = {
        "synthetic": {"power_nodes": 4, "gas_nodes": 2, "days": 12, "coupling_per_power": 1},
        "games": {"k": 2, "max_epochs": 30},
        "k_list": [2],
        "seed": 1,
        "output_dir": str(tmp_path / "out"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    files = [str(f) for f in g.run_pipeline(path, "cluster")]
    assert any(f.endswith("raw_k2.json") for f in files)
    assert any(f.endswith("manifest.json") for f in files)
    with pytest.raises(ValueError):
        g.run_pipeline(path, "nonsense")
