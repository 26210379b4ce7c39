"""Numerical solver for the multi-row CBF quadratic program

    min_u 1/2 |u - u_bar|^2   s.t.   A u >= b

by Hildreth's cyclic dual coordinate ascent.  With the identity Hessian the
primal is recovered as u = u_bar + A^T lambda and each coordinate update of
the dual is a closed-form clipped Newton step.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .dynamics import eval_f, eval_g
from .errors import ParameterError, ShapeError


@dataclass(frozen=True)
class PolytopeQp:
    a_matrix: np.ndarray
    b_vector: np.ndarray
    nominal: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a_matrix, dtype=float)
        b = np.ascontiguousarray(self.b_vector, dtype=float)
        u = np.ascontiguousarray(self.nominal, dtype=float)
        if a.ndim != 2 or b.shape != (a.shape[0],) or u.shape != (a.shape[1],):
            raise ShapeError(f"inconsistent QP shapes A{a.shape} b{b.shape} u{u.shape}")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "b_vector", b)
        object.__setattr__(self, "nominal", u)


@dataclass(frozen=True)
class QpSolution:
    solution: np.ndarray
    duals: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 10_000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")


def build_cbf_qp(bset, x, system, alpha, nominal):
    """One row per barrier: L_g h_i . u >= -L_f h_i - alpha(h_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (system.n,):
        raise ShapeError(f"state must have shape ({system.n},), got {x.shape}")
    nominal = np.asarray(nominal, dtype=float)
    if nominal.shape != (system.m,):
        raise ShapeError(f"nominal must have shape ({system.m},), got {nominal.shape}")
    ab = kernels.circle_qp_rows(x, bset.centers, bset.radii_sq, eval_f(system, x), eval_g(system, x),
                                float(alpha.gain))
    return PolytopeQp(ab[:, :-1], ab[:, -1], nominal)


def single_constraint_qp(lie_f, lie_g, h, alpha, nominal):
    """The one-row problem posed by a (composite) barrier."""
    return PolytopeQp(np.atleast_2d(lie_g), np.array([-lie_f - alpha(h)]), nominal)


def kkt_residual(qp, candidate_u, candidate_duals):
    """Max of stationarity, primal violation, dual negativity and complementarity."""
    u = np.ascontiguousarray(candidate_u, dtype=float)
    lam = np.ascontiguousarray(candidate_duals, dtype=float)
    if u.shape != qp.nominal.shape or lam.shape != qp.b_vector.shape:
        raise ShapeError("candidate shapes do not match the QP")
    return float(kernels.kkt_residual(qp.a_matrix, qp.b_vector, qp.nominal, u, lam))


def dual_objective(qp, duals):
    return float(kernels.dual_objective(qp.a_matrix, qp.b_vector, qp.nominal, np.asarray(duals, dtype=float)))


_NO_TRACE = np.empty(0)


def solve_dual_ascent(qp, cfg=SolverConfig(), trace=None):
    """Hildreth sweeps until the KKT residual drops below ``cfg.tolerance``.

    Hitting the iteration cap is not an error: the best iterate comes back
    with ``converged=False``.  Pass a preallocated ``trace`` of length
    ``max_iterations + 1`` to record the dual objective after every sweep.
    """
    buf = _NO_TRACE if trace is None else trace
    out = kernels.hildreth_packed(
        qp.a_matrix, qp.b_vector, qp.nominal, float(cfg.tolerance), int(cfg.max_iterations), buf
    )
    m = qp.nominal.shape[0]
    sweeps, res = out[-2:].tolist()
    return QpSolution(out[:m], out[m:-2], res, int(sweeps), res <= cfg.tolerance)
