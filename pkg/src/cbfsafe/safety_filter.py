"""Closed-form safety layer for a single (composite) CBF constraint.

The projection of a nominal action u_bar onto the half-space

    L_f h + L_g h . u >= -alpha(h)

is u_s = u_bar + max(0, eta) * L_g h, with
eta = -(L_f h + L_g h . u_bar + alpha(h)) / |L_g h|^2 (and eta = 0 when
L_g h vanishes).  Because u_s is an explicit function of u_bar, its Jacobian
is available analytically and the layer can sit at the end of a policy net.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .barriers import CompositeEval, composite_batch
from .dynamics import eval_f, eval_g
from .errors import ParameterError, ShapeError

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class ClassKLinear:
    """alpha(h) = gain * h."""

    gain: float = 5.0

    def __post_init__(self):
        if not self.gain > 0:
            raise ParameterError(f"class-K gain must be positive, got {self.gain}")

    def __call__(self, h):
        return self.gain * h


@dataclass(frozen=True)
class FilterResult:
    safe_action: np.ndarray
    eta: float
    active: bool
    constraint_slack: float


@dataclass(frozen=True)
class FilterJacobian:
    matrix: np.ndarray


def _lie_g_is_zero(lie_g):
    return bool(np.all(np.abs(lie_g) <= ZERO_TOL))


def eta(lie_f, lie_g, h, nominal, alpha):
    lie_g = np.asarray(lie_g, dtype=float)
    if _lie_g_is_zero(lie_g):
        return 0.0
    return float(-(lie_f + lie_g @ np.asarray(nominal, dtype=float) + alpha(h)) / (lie_g @ lie_g))


def safe_action(lie_f, lie_g, h, nominal, alpha):
    lie_g = np.ascontiguousarray(lie_g, dtype=float)
    nominal = np.ascontiguousarray(nominal, dtype=float)
    us, e = kernels.closed_form(float(lie_f), lie_g, float(h), nominal, float(alpha.gain), ZERO_TOL)
    slack = float(lie_f + lie_g @ us + alpha(h))
    return FilterResult(us, float(e), bool(e > 0.0), slack)


def jacobian_wrt_nominal(lie_g, eta_value):
    """d u_s / d u_bar: identity when inactive, I - g g^T / |g|^2 when active.

    At the kink eta == 0 the inactive branch is used.
    """
    lie_g = np.asarray(lie_g, dtype=float)
    m = lie_g.shape[0]
    if eta_value <= 0.0 or _lie_g_is_zero(lie_g):
        return FilterJacobian(np.eye(m))
    return FilterJacobian(np.eye(m) - np.outer(lie_g, lie_g) / (lie_g @ lie_g))


def filter_pipeline(bset, kappa, system, alpha, x, nominal):
    """Composite CBF at ``x`` followed by the closed-form correction of ``nominal``.

    Returns ``(FilterResult, FilterJacobian, CompositeEval)``.
    """
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    x = np.asarray(x, dtype=float)
    if x.shape != (system.n,) or system.n < 2:
        raise ShapeError(f"state must have shape ({system.n},), got {x.shape}")
    nominal = np.asarray(nominal, dtype=float)
    if nominal.shape != (system.m,):
        raise ShapeError(f"nominal must have shape ({system.m},), got {nominal.shape}")
    out = kernels.circle_filter(
        x, bset.centers, bset.radii_sq, float(kappa), eval_f(system, x), eval_g(system, x),
        nominal, float(alpha.gain), ZERO_TOL,
    )
    n_obs, n, m = len(bset), system.n, system.m
    # packed layout: hvals, weights, grad, lie_g, u_s, jacobian, then h, lie_f, eta, slack
    k = 2 * n_obs + n
    h, lie_f, e, slack = out[-4:].tolist()
    lie_g = out[k:k + m]
    res = FilterResult(out[k + m:k + 2 * m], e, e > 0.0, slack)
    jac = FilterJacobian(out[k + 2 * m:k + 2 * m + m * m].reshape(m, m))
    return res, jac, CompositeEval(h, out[n_obs:2 * n_obs], out[2 * n_obs:k], lie_f, lie_g, out[:n_obs])


@dataclass
class BatchFilterOutput:
    safe_action: np.ndarray  # (B, m)
    eta: np.ndarray  # (B,)
    lie_g: np.ndarray  # (B, m)
    composite_h: np.ndarray  # (B,)
    barrier_values: np.ndarray  # (B, I)


def filter_batch(bset, kappa, system, gain, X, U):
    """Row-wise ``filter_pipeline`` over a minibatch of states ``X`` and nominals ``U``."""
    X = np.asarray(X, dtype=float)
    H, h, _, grad2 = composite_batch(bset, kappa, X[:, :2])
    grad = np.zeros_like(X)
    grad[:, :2] = grad2
    lie_f, lie_g = system.lie_batch(grad, X)
    lie_g = np.ascontiguousarray(lie_g)
    us, e = kernels.closed_form_batch(
        np.ascontiguousarray(lie_f), lie_g, h, np.ascontiguousarray(U, dtype=float), float(gain), ZERO_TOL
    )
    return BatchFilterOutput(us, e, lie_g, h, H)


def filter_vjp(lie_g, eta_values, grad_safe):
    """Pull a (B, m) cotangent on u_s back to u_bar through the analytic Jacobian.

    The Jacobian is a symmetric projector, so J^T v = v - g (g.v)/|g|^2 on
    active rows and v elsewhere.
    """
    active = (eta_values > 0.0) & ~np.all(np.abs(lie_g) <= ZERO_TOL, axis=1)
    g2 = np.where(active, np.einsum("bj,bj->b", lie_g, lie_g), 1.0)
    coef = np.where(active, np.einsum("bj,bj->b", lie_g, grad_safe) / g2, 0.0)
    return grad_safe - coef[:, None] * lie_g
