"""Multi-constraint CBF safety layer with a closed-form solution, for safe RL."""
from ._backend import BACKEND
from .barriers import (
    BarrierSet,
    CircularObstacleBarrier,
    bound_check,
    composite_eval,
    composite_lie,
    composite_value,
    composite_weights,
    eval_barrier,
)
from .dynamics import AffineSystem, SingleIntegrator2D, eval_f, eval_g, step_euler
from .qp_baseline import PolytopeQp, QpSolution, SolverConfig, build_cbf_qp, kkt_residual, solve_dual_ascent
from .safety_filter import ClassKLinear, FilterJacobian, FilterResult, eta, filter_pipeline, jacobian_wrt_nominal, safe_action

__all__ = [
    "BACKEND",
    "BarrierSet",
    "CircularObstacleBarrier",
    "bound_check",
    "composite_eval",
    "composite_lie",
    "composite_value",
    "composite_weights",
    "eval_barrier",
    "AffineSystem",
    "SingleIntegrator2D",
    "eval_f",
    "eval_g",
    "step_euler",
    "PolytopeQp",
    "QpSolution",
    "SolverConfig",
    "build_cbf_qp",
    "kkt_residual",
    "solve_dual_ascent",
    "ClassKLinear",
    "FilterJacobian",
    "FilterResult",
    "eta",
    "filter_pipeline",
    "jacobian_wrt_nominal",
    "safe_action",
]

__version__ = "0.1.0"
