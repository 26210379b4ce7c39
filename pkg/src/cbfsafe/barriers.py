"""Circular-obstacle barriers and their Log-Sum-Exp (smooth-min) composite.

For barriers h_1..h_I and sharpness kappa > 0 the composite is

    h(x) = -(1/kappa) * log(sum_i exp(-kappa * h_i(x)))

with weights lambda_i = exp(-kappa * (h_i - h)), which sum to one, and
Lie derivatives L h = sum_i lambda_i L h_i.  It under-approximates the
minimum:  min_i h_i - log(I)/kappa <= h <= min_i h_i.
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._backend import kernels
from .dynamics import eval_f, eval_g
from .errors import ConsistencyError, ParameterError, ShapeError

BOUND_TOL = 1e-9


@dataclass(frozen=True)
class CircularObstacleBarrier:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 2 or not np.all(np.isfinite(c)):
            raise ParameterError(f"obstacle center must be a finite 2-vector, got {self.center}")
        if not self.radius > 0:
            raise ParameterError(f"obstacle radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class BarrierEval:
    value: float
    gradient: np.ndarray


@dataclass(frozen=True)
class CompositeEval:
    value: float
    weights: np.ndarray
    gradient: np.ndarray
    lie_f: float
    lie_g: np.ndarray
    barrier_values: np.ndarray


@dataclass(frozen=True)
class BarrierSet:
    """Ordered obstacles; index i is the sequence position."""

    barriers: tuple
    centers: np.ndarray = field(init=False, repr=False, compare=False)
    radii_sq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bs = tuple(self.barriers)
        if len(bs) < 1:
            raise ParameterError("a barrier set needs at least one barrier")
        object.__setattr__(self, "barriers", bs)
        centers = np.array([b.center for b in bs], dtype=float)
        radii_sq = np.array([b.radius**2 for b in bs], dtype=float)
        centers.flags.writeable = False
        radii_sq.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii_sq", radii_sq)

    def __len__(self):
        return len(self.barriers)

    @classmethod
    def from_records(cls, records: Sequence[dict]):
        """Build from ``[{"center": [x, y], "radius": r}, ...]``."""
        return cls(tuple(CircularObstacleBarrier(tuple(r["center"]), r["radius"]) for r in records))

    def to_records(self):
        return [{"center": list(b.center), "radius": b.radius} for b in self.barriers]


def _position(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise ShapeError(f"state must be a vector with n >= 2, got shape {x.shape}")
    return x


def _check_kappa(kappa):
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")


def eval_barrier(b, x):
    """h_i(x) = |p - p_obs|^2 - r^2 and its gradient (zero beyond the position)."""
    x = _position(x)
    d = x[:2] - np.asarray(b.center)
    grad = np.zeros_like(x)
    grad[:2] = 2.0 * d
    return BarrierEval(float(d @ d - b.radius**2), grad)


def barrier_values(bset, x):
    x = _position(x)
    d = x[:2][None, :] - bset.centers
    return np.einsum("ij,ij->i", d, d) - bset.radii_sq


def _composite(bset, kappa, x):
    _check_kappa(kappa)
    x = _position(x)
    p = np.ascontiguousarray(x[:2])
    hvals, h, lam, grad2 = kernels.circle_composite(p, bset.centers, bset.radii_sq, float(kappa))
    grad = np.zeros_like(x)
    grad[:2] = grad2
    return hvals, float(h), lam, grad


def composite_value(bset, kappa, x):
    return _composite(bset, kappa, x)[1]


def composite_weights(bset, kappa, x):
    return _composite(bset, kappa, x)[2]


def composite_eval(bset, kappa, x, system):
    """Composite value, weights, gradient and Lie derivatives in one pass."""
    if np.shape(x) != (system.n,):
        raise ShapeError(f"state must have shape ({system.n},), got {np.shape(x)}")
    hvals, h, lam, grad = _composite(bset, kappa, x)
    lie_f = float(grad @ eval_f(system, x))
    lie_g = grad @ eval_g(system, x)
    return CompositeEval(h, lam, grad, lie_f, lie_g, hvals)


def composite_lie(bset, kappa, x, system):
    ev = composite_eval(bset, kappa, x, system)
    return ev.lie_f, ev.lie_g


def composite_batch(bset, kappa, P):
    """Vectorised composite over a (B, 2) stack of positions.

    Returns (per-barrier values (B, I), h (B,), weights (B, I), gradient (B, 2)).
    """
    _check_kappa(kappa)
    P = np.ascontiguousarray(P, dtype=float)
    return kernels.circle_composite_batch(P, bset.centers, bset.radii_sq, float(kappa))


def bound_check(bset, kappa, x):
    """Return (lower, h, upper) for the smooth-min sandwich; raise if it fails."""
    hvals, h, _, _ = _composite(bset, kappa, x)
    upper = float(hvals.min())
    lower = upper - np.log(len(bset)) / kappa
    if not (lower - BOUND_TOL <= h <= upper + BOUND_TOL):
        raise ConsistencyError(f"smooth-min bound violated: {lower} <= {h} <= {upper}")
    return lower, h, upper
