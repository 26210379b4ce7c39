import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbfsafe.dynamics import AffineSystem, SingleIntegrator2D, eval_f, eval_g, step_euler
from cbfsafe.errors import ParameterError, ShapeError

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_single_integrator_drift_is_zero(system):
    assert np.array_equal(eval_f(system, [3.1, -2.0]), [0.0, 0.0])
    assert np.array_equal(eval_f(system, [0.0, 0.0]), [0.0, 0.0])


def test_single_integrator_input_map_is_identity(system):
    assert np.array_equal(eval_g(system, [5.0, 5.0]), np.eye(2))
    assert np.array_equal(eval_g(system, [-1.0, 7.0]), np.eye(2))


def test_custom_evaluators():
    drift = AffineSystem(2, 2, f=lambda x: np.array([x[1], 0.0]), g=lambda x: np.eye(2))
    assert np.array_equal(eval_f(drift, [1.0, 4.0]), [4.0, 0.0])
    scaled = AffineSystem(2, 2, f=lambda x: np.zeros(2), g=lambda x: 2 * np.eye(2))
    assert np.array_equal(eval_g(scaled, [0.0, 0.0]), [[2.0, 0.0], [0.0, 2.0]])


@pytest.mark.parametrize(
    "x, u, dt, expected",
    [
        ((0, 0), (1, 0), 0.02, (0.02, 0.0)),
        ((1, 1), (0, 0), 0.02, (1.0, 1.0)),
        ((1, 1), (-1, 2), 0.1, (0.9, 1.2)),
    ],
)
def test_euler_step(system, x, u, dt, expected):
    np.testing.assert_allclose(step_euler(system, x, u, dt), expected, atol=1e-15)


def test_euler_rejects_nonpositive_dt(system):
    with pytest.raises(ParameterError):
        step_euler(system, [0, 0], [1, 0], 0.0)
    with pytest.raises(ParameterError):
        step_euler(system, [0, 0], [1, 0], -0.1)


def test_shape_errors(system):
    with pytest.raises(ShapeError):
        eval_f(system, [1.0, 2.0, 3.0])
    with pytest.raises(ShapeError):
        step_euler(system, [0, 0], [1, 0, 0], 0.1)
    bad = AffineSystem(2, 2, f=lambda x: np.zeros(2), g=lambda x: np.eye(3))
    with pytest.raises(ShapeError):
        eval_g(bad, [0.0, 0.0])


def test_lie_batch_fallback_matches_vectorised(rng):
    fast = SingleIntegrator2D()
    slow = AffineSystem(2, 2, f=fast.f, g=fast.g)
    grad, X = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
    for a, b in zip(fast.lie_batch(grad, X), slow.lie_batch(grad, X)):
        np.testing.assert_array_equal(a, b)


@given(st.tuples(finite, finite), st.tuples(finite, finite))
def test_deterministic(x, u):
    s = SingleIntegrator2D()
    assert np.array_equal(step_euler(s, x, u, 0.02), step_euler(s, x, u, 0.02))


small = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200)
@given(st.tuples(small, small), st.tuples(small, small), st.tuples(small, small), small, small)
def test_step_is_linear_in_u(x, u1, u2, a, b):
    s = SingleIntegrator2D()
    x = np.array(x)
    u1, u2 = np.array(u1), np.array(u2)
    lhs = step_euler(s, x, a * u1 + b * u2, 0.02) - x
    rhs = a * (step_euler(s, x, u1, 0.02) - x) + b * (step_euler(s, x, u2, 0.02) - x)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)
