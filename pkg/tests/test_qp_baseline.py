import numpy as np
import pytest

from cbfsafe.barriers import BarrierSet
from cbfsafe.errors import ParameterError, ShapeError
from cbfsafe.qp_baseline import (
    PolytopeQp,
    SolverConfig,
    build_cbf_qp,
    dual_objective,
    kkt_residual,
    single_constraint_qp,
    solve_dual_ascent,
)
from cbfsafe.safety_filter import safe_action

ONE = BarrierSet.from_records([{"center": [0, 0], "radius": 0.5}])


def independent_kkt(A, b, ubar, u, lam):
    """Plain numpy KKT certificate, independent of the solver's own residual."""
    slack = A @ u - b
    return max(
        np.abs(u - ubar - A.T @ lam).max(),
        max(0.0, -slack.min()),
        max(0.0, -lam.min()),
        np.abs(lam * slack).max(),
    )


def test_build_single_obstacle(system, alpha):
    qp = build_cbf_qp(ONE, [1.0, 0.0], system, alpha, [-3.0, 0.0])
    np.testing.assert_allclose(qp.a_matrix, [[2.0, 0.0]], atol=1e-15)
    np.testing.assert_allclose(qp.b_vector, [-3.75], atol=1e-15)


def test_build_shape_errors(system, alpha, default_set):
    with pytest.raises(ShapeError):
        build_cbf_qp(default_set, [1.0, 0.0, 0.0], system, alpha, [0.0, 0.0])
    with pytest.raises(ShapeError):
        build_cbf_qp(default_set, [1.0, 0.0], system, alpha, [0.0])
    with pytest.raises(ShapeError):
        PolytopeQp(np.zeros((2, 2)), np.zeros(3), np.zeros(2))


def test_solver_config_validation():
    with pytest.raises(ParameterError):
        SolverConfig(tolerance=0.0)
    with pytest.raises(ParameterError):
        SolverConfig(max_iterations=0)


def test_all_slack_returns_nominal(system, alpha, default_set):
    u = np.array([-0.5, -0.5])  # moving away from every obstacle
    sol = solve_dual_ascent(build_cbf_qp(default_set, [0.0, 0.0], system, alpha, u))
    assert sol.converged and sol.iterations == 1
    np.testing.assert_array_equal(sol.solution, u)
    np.testing.assert_array_equal(sol.duals, 0.0)


def test_duplicate_rows(system, alpha):
    dup = BarrierSet.from_records([{"center": [0, 0], "radius": 0.5}] * 2)
    x, u = [1.0, 0.0], [-3.0, 0.4]
    one = solve_dual_ascent(build_cbf_qp(ONE, x, system, alpha, u))
    two = solve_dual_ascent(build_cbf_qp(dup, x, system, alpha, u))
    assert one.converged and two.converged
    np.testing.assert_allclose(two.solution, one.solution, atol=1e-8)
    assert two.duals.sum() == pytest.approx(one.duals.sum(), abs=1e-8)


def test_single_violated_row_matches_closed_form(alpha, rng):
    for _ in range(10_000):
        g = rng.normal(size=2)
        lie_f, h = rng.normal(), rng.normal()
        u = rng.uniform(-3, 3, 2)
        sol = solve_dual_ascent(single_constraint_qp(lie_f, g, h, alpha, u))
        assert sol.converged
        np.testing.assert_allclose(sol.solution, safe_action(lie_f, g, h, u, alpha).safe_action, atol=1e-6, rtol=0)


def test_two_active_rows(rng):
    done = 0
    while done < 50:
        A = rng.normal(size=(2, 2))
        if np.linalg.cond(A) > 5.0:
            continue  # near-parallel rows converge too slowly for cyclic ascent
        done += 1
        u_star, lam_star = rng.normal(size=2), rng.uniform(0.1, 2.0, 2)
        qp = PolytopeQp(A, A @ u_star, u_star - A.T @ lam_star)
        sol = solve_dual_ascent(qp)
        assert sol.converged and sol.kkt_residual <= 1e-8
        assert independent_kkt(qp.a_matrix, qp.b_vector, qp.nominal, sol.solution, sol.duals) <= 1e-8
        np.testing.assert_allclose(sol.solution, u_star, atol=1e-6)


def test_kkt_residual_examples():
    qp = single_constraint_qp(0.0, np.array([2.0, 0.0]), 0.75, lambda h: 5.0 * h, np.array([-3.0, 0.0]))
    assert kkt_residual(qp, np.array([-1.875, 0.0]), np.array([0.5625])) <= 1e-12
    slack_qp = PolytopeQp(np.array([[1.0, 0.0]]), np.array([-10.0]), np.array([0.0, 0.0]))
    assert kkt_residual(slack_qp, np.zeros(2), np.zeros(1)) == 0.0
    assert kkt_residual(qp, np.array([-1.875 + 1e-3, 0.0]), np.array([0.5625])) >= 1e-4
    assert kkt_residual(qp, np.array([-1.875, 1e-3]), np.array([0.5625])) >= 1e-4


def test_kkt_residual_shape_check():
    qp = PolytopeQp(np.eye(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ShapeError):
        kkt_residual(qp, np.zeros(3), np.zeros(2))


def test_dual_objective_monotone_and_outputs_feasible(system, alpha, rng):
    for n_con in (3, 10, 30):
        for _ in range(30):
            recs = [{"center": list(rng.uniform(-3, 3, 2)), "radius": rng.uniform(0.2, 0.6)} for _ in range(n_con)]
            bset = BarrierSet.from_records(recs)
            x, u = rng.uniform(-3, 3, 2), rng.uniform(-3, 3, 2) * 3
            qp = build_cbf_qp(bset, x, system, alpha, u)
            cfg = SolverConfig()
            trace = np.full(cfg.max_iterations + 1, np.nan)
            sol = solve_dual_ascent(qp, cfg, trace=trace)
            tr = trace[: sol.iterations + 1]
            assert np.all(np.diff(tr) >= -1e-12 * np.maximum(1.0, np.abs(tr[1:])))
            assert tr[-1] == pytest.approx(dual_objective(qp, sol.duals), abs=1e-9)
            if sol.converged:
                assert np.all(qp.a_matrix @ sol.solution - qp.b_vector >= -1e-8)
                assert np.all(sol.duals >= -1e-10)
                assert independent_kkt(qp.a_matrix, qp.b_vector, qp.nominal, sol.solution, sol.duals) <= 1e-8


def test_infeasible_reports_not_converged():
    qp = PolytopeQp(np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([1.0, 1.0]), np.zeros(2))
    sol = solve_dual_ascent(qp, SolverConfig(max_iterations=50))
    assert not sol.converged and sol.iterations == 50
    assert sol.kkt_residual > 1e-8
