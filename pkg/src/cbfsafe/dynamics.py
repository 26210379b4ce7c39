"""Control-affine systems  x' = f(x) + g(x) u  and Euler propagation."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError, ShapeError


def _as_vec(x, n, name):
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ShapeError(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class AffineSystem:
    """Dimension metadata plus evaluators for the drift ``f`` and input map ``g``.

    ``f_batch``/``g_batch`` are optional vectorised evaluators over a (B, n)
    stack of states; when absent the scalar evaluators are looped.
    """

    n: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], np.ndarray]
    f_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    g_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ParameterError("system dimensions must be positive")

    def lie_batch(self, grad, X):
        """Return (L_f h, L_g h) for a stack of gradients ``grad`` (B, n) at ``X``."""
        if self.f_batch is not None and self.g_batch is not None:
            F = self.f_batch(X)
            G = self.g_batch(X)
        else:
            F = np.stack([eval_f(self, x) for x in X])
            G = np.stack([eval_g(self, x) for x in X])
        return np.einsum("bn,bn->b", grad, F), np.einsum("bn,bnm->bm", grad, G)


def eval_f(system, x):
    x = _as_vec(x, system.n, "x")
    out = np.asarray(system.f(x), dtype=float)
    if out.shape != (system.n,):
        raise ShapeError(f"f(x) must have shape ({system.n},), got {out.shape}")
    return out


def eval_g(system, x):
    x = _as_vec(x, system.n, "x")
    out = np.asarray(system.g(x), dtype=float)
    if out.shape != (system.n, system.m):
        raise ShapeError(
            f"g(x) must have shape ({system.n}, {system.m}), got {out.shape}"
        )
    return out


def step_euler(system, x, u, dt):
    """One explicit Euler step ``x + dt * (f(x) + g(x) u)``."""
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    x = _as_vec(x, system.n, "x")
    u = _as_vec(u, system.m, "u")
    return x + dt * (eval_f(system, x) + eval_g(system, x) @ u)


# shared read-only constants; the dynamics are state-independent
_ZERO2 = np.zeros(2)
_EYE2 = np.eye(2)
_ZERO2.flags.writeable = False
_EYE2.flags.writeable = False


def _zero_drift(x):
    return _ZERO2


def _identity_input(x):
    return _EYE2


def _zero_drift_batch(X):
    return np.zeros((X.shape[0], 2))


def _identity_input_batch(X):
    return np.broadcast_to(np.eye(2), (X.shape[0], 2, 2))


def SingleIntegrator2D():
    """Planar point mass with velocity input: f = 0, g = I."""
    return AffineSystem(
        n=2,
        m=2,
        f=_zero_drift,
        g=_identity_input,
        f_batch=_zero_drift_batch,
        g_batch=_identity_input_batch,
    )
