"""Average solving time per time step (ATTS): closed-form layer vs numerical QP.

The closed-form method solves the composite single-constraint problem; the
baseline solves the full I-row QP.  Before any timing, both are run on the
composite problem over an instance prefix and must agree to 1e-6.
"""
import csv
import io
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._backend import BACKEND
from .barriers import BarrierSet, CircularObstacleBarrier, barrier_values
from .dynamics import SingleIntegrator2D
from .errors import ConsistencyError, ParameterError
from .qp_baseline import SolverConfig, build_cbf_qp, single_constraint_qp, solve_dual_ascent
from .safety_filter import ClassKLinear, filter_pipeline

METHODS = ("closed_form", "qp_baseline")
CAVEAT = (
    "Caveat: the QP baseline is timed on the forward solve only, with no gradient "
    "computation, whereas differentiable QP layers also backpropagate through the "
    "solver; the reported speedup is therefore a conservative lower bound."
)
GATE_TOL = 1e-6
GATE_PREFIX = 1000
WARMUP = 100


@dataclass
class BenchSpec:
    constraint_counts: Sequence[int] = (3, 10, 30)
    repetitions: int = 10_000
    methods: Sequence[str] = METHODS
    seed: int = 0
    kappa: float = 2.0
    alpha_gain: float = 5.0

    def __post_init__(self):
        if not self.constraint_counts or min(self.constraint_counts) < 1:
            raise ParameterError("constraint counts must be >= 1")
        if self.repetitions < 100:
            raise ParameterError("repetitions must be >= 100")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ParameterError(f"unknown methods {sorted(bad)}")


@dataclass
class BenchRow:
    method: str
    constraint_count: int
    atts_seconds: float
    stddev_seconds: float
    correctness_max_gap: float
    failures: int = 0
    valid: bool = True
    backend: str = field(default=BACKEND)


def generate_instances(count, n_constraints, seed, box=3.0):
    """Random obstacle scenes with a safe state and a nominal action each."""
    if n_constraints < 1:
        raise ParameterError("need at least one constraint")
    rng = np.random.default_rng([int(seed), int(n_constraints)])
    out = []
    for _ in range(count):
        centers = rng.uniform(-box, box, size=(n_constraints, 2))
        radii = rng.uniform(0.2, 0.6, size=n_constraints)
        bset = BarrierSet(tuple(CircularObstacleBarrier(tuple(c), r) for c, r in zip(centers, radii)))
        while True:
            x = rng.uniform(-box, box, size=2)
            if barrier_values(bset, x).min() > 0:
                break
        u = rng.uniform(-box, box, size=2)
        out.append((bset, x, u))
    return out


def correctness_gap(instances, kappa, alpha, solver_cfg=SolverConfig()):
    """Max per-component gap between closed form and the QP on the composite constraint."""
    system = SingleIntegrator2D()
    gap = 0.0
    for bset, x, u in instances:
        res, _, comp = filter_pipeline(bset, kappa, system, alpha, x, u)
        qp = single_constraint_qp(comp.lie_f, comp.lie_g, comp.value, alpha, u)
        sol = solve_dual_ascent(qp, solver_cfg)
        gap = max(gap, float(np.max(np.abs(sol.solution - res.safe_action))))
    return gap


def _time_calls(fn, instances):
    clock = time.perf_counter_ns
    samples = np.empty(len(instances))
    for k, inst in enumerate(instances):
        t0 = clock()
        fn(*inst)
        samples[k] = clock() - t0
    return samples * 1e-9


def run_bench(spec):
    system = SingleIntegrator2D()
    alpha = ClassKLinear(spec.alpha_gain)
    kappa = spec.kappa
    solver_cfg = SolverConfig()

    def closed_form(bset, x, u):
        return filter_pipeline(bset, kappa, system, alpha, x, u)

    failures = 0

    def qp_baseline(bset, x, u):
        nonlocal failures
        sol = solve_dual_ascent(build_cbf_qp(bset, x, system, alpha, u), solver_cfg)
        if not sol.converged:
            failures += 1
        return sol

    fns = {"closed_form": closed_form, "qp_baseline": qp_baseline}
    rows = []
    for n_con in spec.constraint_counts:
        instances = generate_instances(WARMUP + spec.repetitions, n_con, spec.seed)
        warm, timed = instances[:WARMUP], instances[WARMUP:]
        gap = correctness_gap(timed[:GATE_PREFIX], kappa, alpha, solver_cfg)
        if not gap <= GATE_TOL:
            raise ConsistencyError(f"correctness gate failed at I={n_con}: gap {gap:.3e} > {GATE_TOL}")
        for method in spec.methods:
            fn = fns[method]
            for inst in warm:
                fn(*inst)
            failures = 0
            samples = _time_calls(fn, timed)
            n_fail = failures if method == "qp_baseline" else 0
            rows.append(BenchRow(
                method=method,
                constraint_count=n_con,
                atts_seconds=float(samples.mean()),
                stddev_seconds=float(samples.std(ddof=1)),
                correctness_max_gap=gap,
                failures=n_fail,
                valid=n_fail <= 0.01 * len(timed),
            ))
    return rows


def speedups(rows):
    """qp ATTS / closed-form ATTS keyed by constraint count."""
    cf = {r.constraint_count: r.atts_seconds for r in rows if r.method == "closed_form"}
    qp = {r.constraint_count: r.atts_seconds for r in rows if r.method == "qp_baseline"}
    return {k: qp[k] / cf[k] for k in cf if k in qp}


REPORT_FIELDS = ["method", "I", "atts_mean_s", "atts_std_s", "speedup_vs_qp", "correctness_max_gap"]


def emit_report(rows):
    """Returns ``(csv_text, summary_text)``."""
    if not rows:
        raise ValueError("no benchmark rows")
    sp = speedups(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in rows:
        s = sp.get(r.constraint_count, float("nan")) if r.method == "closed_form" else 1.0
        if r.method == "qp_baseline" and r.constraint_count not in sp:
            s = float("nan")
        w.writerow([r.method, r.constraint_count, f"{r.atts_seconds:.6e}", f"{r.stddev_seconds:.6e}",
                    f"{s:.4f}", f"{r.correctness_max_gap:.3e}"])
    lines = [CAVEAT, f"kernel backend: {rows[0].backend}"]
    for r in rows:
        flag = "" if r.valid else f"  INVALID ({r.failures} non-converged)"
        lines.append(f"{r.method:>12s}  I={r.constraint_count:<3d} ATTS {r.atts_seconds * 1e6:9.2f} us "
                     f"(sd {r.stddev_seconds * 1e6:.2f}){flag}")
    for k, v in sp.items():
        lines.append(f"speedup at I={k}: {v:.2f}x")
    return buf.getvalue(), "\n".join(lines) + "\n"
