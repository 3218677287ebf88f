import math

import numpy as np
import pytest

import ompath


def test_constant_path_closed_form():
    values = np.full((1001, 1), -2.0)
    om = ompath.om_functional(ompath.builtin_model("example1"), values)
    assert om["total"] == pytest.approx(-4.0, abs=1e-6)
    assert om["drift_term"] == 0.0


def test_schemes_agree_on_unit_speed_path():
    values = np.linspace(0.0, 1.0, 51).reshape(-1, 1)
    model = ompath.builtin_model("zero_drift")
    for scheme in (ompath.Scheme.midpoint, ompath.Scheme.trapezoid):
        assert ompath.om_functional(model, values, scheme)["total"] == pytest.approx(1.0)


def test_minimizer_matches_sinh():
    r = ompath.minimize_om(ompath.builtin_model("linear_test"), [0.0], [1.0], steps=200)
    assert r["converged"]
    t = np.linspace(0.0, 1.0, 201)
    assert np.max(np.abs(r["path"][:, 0] - np.sinh(t) / math.sinh(1.0))) <= 1e-3


def test_shooting_with_python_rhs():
    y = ompath.solve_el_bvp(lambda t, y, v: y, 0.0, 1.0, 400)
    t = np.linspace(0.0, 1.0, 401)
    assert np.max(np.abs(y[:, 0] - np.sinh(t) / math.sinh(1.0))) <= 1e-8


def test_simulation_is_deterministic():
    model = ompath.builtin_model("example2", {"a": 1.0, "b": 1.0})
    a = ompath.simulate(model, [-2.0, -2.0], steps=100, seed=3, samples=2)
    b = ompath.simulate(model, [-2.0, -2.0], steps=100, seed=3, samples=2)
    assert len(a) == 2 and a[0].shape == (101, 2)
    assert np.array_equal(a[0], b[0])
    assert not np.array_equal(a[0], a[1])


def test_gradient_shape_and_endpoints():
    model = ompath.builtin_model("example1")
    ends = ompath.default_endpoints("example1")
    values = np.linspace(ends[0][0], ends[1][0], 41).reshape(-1, 1)
    assert ompath.om_path_gradient(model, values).shape == (39, 1)


def test_holder_norm_of_identity():
    values = np.linspace(0.0, 1.0, 65).reshape(-1, 1)
    assert ompath.holder_norm(values, 0.25) == pytest.approx(2.0)


def test_self_ratio_and_tube():
    model = ompath.builtin_model("linear_test")
    values = np.linspace(0.0, 1.0, 4).reshape(-1, 1)
    r = ompath.om_ratio_check(model, values, values, epsilon=1.0, samples=2000)
    assert r["log_prob_ratio"] == 0.0 and not r["inconclusive"]
    e = ompath.tube_probability(model, values, 1.0, samples=2000)
    assert 0.0 < e["probability"] <= 1.0


def test_errors_map_to_exceptions():
    with pytest.raises(ompath.ContractError):
        ompath.builtin_model("example2", {"a": 1.0})
    with pytest.raises(ompath.SingularMatrixError):
        ompath.om_functional(ompath.builtin_model("zero_drift", {"sigma": 0.0}), np.zeros((5, 1)))
    assert issubclass(ompath.SingularMatrixError, ompath.NumericalError)
