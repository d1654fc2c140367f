import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from locus import analytic
from locus.model import (
    DISTANCE,
    SQUARED,
    Scenario,
    ScenarioError,
    Sensor,
    SingularPointError,
    eval_gradient,
    eval_objective,
    scenario_from_json,
    scenario_to_json,
    solution_from_json,
)

SQRT2 = math.sqrt(2.0)


def test_objective_examples():
    s1 = Scenario(2, DISTANCE, (Sensor([0, 0], 1.0),))
    assert eval_objective([0, 0], s1) == pytest.approx(1.0)
    s2 = Scenario(2, SQUARED, (Sensor([0, 0], SQRT2), Sensor([2, 0], SQRT2)))
    assert eval_objective([1, 1], s2) == pytest.approx(0.0, abs=1e-12)
    s3 = Scenario(2, DISTANCE, (Sensor([0, 0], 3.0), Sensor([1, 0], 1.0)))
    assert eval_objective([3, 0], s3) == pytest.approx(1.0)


def test_objective_vectorized_matches_scalar(rng):
    s = Scenario(3, SQUARED, (Sensor([0, 0, 0], 1.0), Sensor([2, 1, 0], 2.0)))
    pts = rng.uniform(-3, 3, size=(50, 3))
    vals = eval_objective(pts, s)
    for p, v in zip(pts, vals):
        assert eval_objective(p, s) == pytest.approx(v, rel=1e-14)


def test_gradient_examples():
    s_dist = Scenario(2, DISTANCE, (Sensor([0, 0], 1.0),))
    assert_allclose(eval_gradient([2, 0], s_dist), [1, 0], atol=1e-12)
    assert_allclose(eval_gradient([0.5, 0], s_dist), [-1, 0], atol=1e-12)
    s_sq = Scenario(2, SQUARED, (Sensor([0, 0], 1.0),))
    assert_allclose(eval_gradient([2, 0], s_sq), [4, 0], atol=1e-12)


def test_gradient_refuses_singular_points():
    s = Scenario(2, DISTANCE, (Sensor([0, 0], 1.0),))
    with pytest.raises(SingularPointError):
        eval_gradient([1, 0], s)
    with pytest.raises(SingularPointError):
        eval_gradient([0, 0], s)


def test_zero_set_iff_on_all_spheres(rng):
    s = Scenario(2, DISTANCE, (Sensor([0, 0], SQRT2), Sensor([2, 0], SQRT2)))
    assert eval_objective([1, 1], s) == pytest.approx(0.0, abs=1e-12)
    for _ in range(200):
        w = rng.uniform(-3, 3, size=2)
        on_all = all(
            abs(np.linalg.norm(w - sen.z) - sen.d) <= 1e-12 for sen in s.sensors
        )
        if not on_all:
            assert eval_objective(w, s) > 0


def test_objective_grows_along_rays(rng):
    for model in (DISTANCE, SQUARED):
        s = Scenario(
            2, model, (Sensor([0, 0], 1.0), Sensor([2, 1], 2.0), Sensor([-1, 2], 0.5))
        )
        r0 = max(np.linalg.norm(sen.z) + sen.d for sen in s.sensors) + 1.0
        for _ in range(50):
            theta = rng.uniform(0, 2 * math.pi)
            ray = np.array([math.cos(theta), math.sin(theta)])
            radii = r0 + np.array([0.0, 0.7, 1.9, 4.2])
            vals = eval_objective(radii[:, None] * ray[None, :], s)
            assert np.all(np.diff(vals) > 0)


def _fd_gradient(w, s, h=1e-6):
    g = np.zeros_like(w)
    for a in range(w.size):
        e = np.zeros_like(w)
        e[a] = h
        g[a] = (eval_objective(w + e, s) - eval_objective(w - e, s)) / (2 * h)
    return g


def _sample_nonsingular(rng, s, n):
    out = []
    while len(out) < n:
        w = rng.uniform(-4, 4, size=s.dim)
        margins = [abs(np.linalg.norm(w - sen.z) - sen.d) for sen in s.sensors]
        dists = [np.linalg.norm(w - sen.z) for sen in s.sensors]
        if min(margins) > 1e-3 and min(dists) > 1e-3:
            out.append(w)
    return out


def test_gradient_matches_finite_differences(rng):
    for dim in (2, 3):
        for model in (DISTANCE, SQUARED):
            sensors = tuple(
                Sensor(rng.uniform(-2, 2, size=dim), rng.uniform(0.5, 2.5))
                for _ in range(3)
            )
            s = Scenario(dim, model, sensors)
            for w in _sample_nonsingular(rng, s, 200):
                g = eval_gradient(w, s)
                fd = _fd_gradient(w, s)
                denom = max(1.0, np.linalg.norm(g))
                assert np.linalg.norm(g - fd) / denom <= 1e-6


def test_single_sensor_gradient_norms(rng):
    for dim in (2, 3):
        z = rng.uniform(-1, 1, size=dim)
        s_d = Scenario(dim, DISTANCE, (Sensor(z, 1.0),))
        s_q = Scenario(dim, SQUARED, (Sensor(z, 1.0),))
        for w in _sample_nonsingular(rng, s_d, 100):
            r = np.linalg.norm(w - z)
            assert abs(np.linalg.norm(eval_gradient(w, s_d)) - 1.0) <= 1e-9
            assert abs(np.linalg.norm(eval_gradient(w, s_q)) - 2 * r) <= 1e-9 * max(1, r)


def test_scaling_equivariance_of_argmin():
    base = Scenario(2, SQUARED, (Sensor([0, 0], 2.5), Sensor([4, 0], 1.0)))
    sol = analytic.solve(base)
    for scale in (0.5, 3.0):
        scaled = Scenario(
            2,
            SQUARED,
            tuple(Sensor(scale * sen.z, scale * sen.d) for sen in base.sensors),
        )
        sol_s = analytic.solve(scaled)
        ref = sol.sample_points(16) * scale
        got = sol_s.sample_points(16)
        assert got.shape == ref.shape
        for p, q in zip(ref, got):
            assert np.linalg.norm(p - q) <= 1e-8 * max(1.0, scale)

    seg = Scenario(2, DISTANCE, (Sensor([0, 0], 3.0), Sensor([1, 0], 1.0)))
    sol_seg = analytic.solve(seg)
    scaled = Scenario(
        2, DISTANCE, tuple(Sensor(2.0 * sen.z, 2.0 * sen.d) for sen in seg.sensors)
    )
    sol2 = analytic.solve(scaled)
    assert_allclose(sol2.sample_points(9), 2.0 * sol_seg.sample_points(9), atol=1e-8)


def test_scenario_json_round_trip():
    s = Scenario(3, DISTANCE, (Sensor([0, 1, 2], 1.5), Sensor([2, 0, 0], 0.5)))
    obj = scenario_to_json(s)
    s2 = scenario_from_json(json.loads(json.dumps(obj)))
    assert s2.dim == 3 and s2.model == DISTANCE
    assert_allclose(s2.sensors[0].z, [0, 1, 2])
    assert s2.sensors[1].d == 0.5


def test_scenario_json_strict():
    good = {"dim": 2, "model": "distance", "sensors": [{"z": [0, 0], "d": 1.0}]}
    scenario_from_json(good)
    with pytest.raises(ScenarioError):
        scenario_from_json({**good, "extra": 1})
    with pytest.raises(ScenarioError):
        scenario_from_json(
            {"dim": 2, "model": "distance", "sensors": [{"z": [0, 0], "d": 1, "x": 2}]}
        )
    with pytest.raises(ScenarioError):
        scenario_from_json({"dim": 4, "model": "distance", "sensors": good["sensors"]})
    with pytest.raises(ScenarioError):
        scenario_from_json({"dim": 2, "model": "cubed", "sensors": good["sensors"]})


def test_solution_json_round_trip():
    s = Scenario(2, SQUARED, (Sensor([0, 0], SQRT2), Sensor([2, 0], SQRT2)))
    sol = analytic.solve(s)
    obj = json.loads(json.dumps(sol.to_json()))
    back = solution_from_json(obj)
    assert back.case == sol.case
    assert back.cardinality == sol.cardinality
    assert back.min_value == sol.min_value
    assert back.resolved == sol.resolved
    assert_allclose(back.sample_points(8), sol.sample_points(8))


def test_solution_json_kinds():
    cases = [
        Scenario(2, DISTANCE, (Sensor([0, 0], 1.0),)),  # circle
        Scenario(3, DISTANCE, (Sensor([0, 0, 0], 1.0),)),  # sphere
        Scenario(3, SQUARED, (Sensor([0, 0, 0], SQRT2), Sensor([2, 0, 0], SQRT2))),
        Scenario(2, DISTANCE, (Sensor([0, 0], 3.0), Sensor([1, 0], 1.0))),  # segment
    ]
    kinds = set()
    for s in cases:
        sol = analytic.solve(s)
        for p in sol.to_json()["pieces"]:
            kinds.add(p["kind"])
        solution_from_json(json.loads(json.dumps(sol.to_json())))
    assert {"circle", "sphere", "segment"} <= kinds


def test_sensor_validation():
    with pytest.raises(ScenarioError):
        Sensor([0, 0], -1.0)
    with pytest.raises(ScenarioError):
        Scenario(2, DISTANCE, (Sensor([0, 0, 0], 1.0),))
    with pytest.raises(ScenarioError):
        Scenario(2, DISTANCE, ())
