"""Self-contained oracle checks, shared by ``cbfsafe check`` and the test suite.

Each check returns a :class:`CheckResult`; none needs training artifacts.
"""
from dataclasses import dataclass

import numpy as np

from .barriers import BarrierSet, composite_batch
from .dynamics import SingleIntegrator2D
from .env import DEFAULT_OBSTACLES, EnvConfig
from .learner.mlp import Mlp, mlp_backward, mlp_forward
from .learner.sac import FilterConfig, SacConfig, SafeSacAgent, policy_loss_and_grads
from .learner.nets import LOG_STD_MAX, LOG_STD_MIN, q_forward
from .qp_baseline import SolverConfig, kkt_residual, single_constraint_qp, solve_dual_ascent
from .safety_filter import ClassKLinear, filter_pipeline, safe_action


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def rel_err(a, b):
    """Norm-wise relative error of ``a`` against reference ``b``."""
    a, b = np.ravel(a), np.ravel(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def default_barriers():
    return BarrierSet.from_records(DEFAULT_OBSTACLES)


def smooth_min_bounds(n_states=100_000, kappas=(0.5, 2.0, 10.0), seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    bset = default_barriers()
    P = rng.uniform(-5.0, 5.0, size=(n_states, 2))
    d = P[:, None, :] - bset.centers[None]
    hmin = ((d**2).sum(axis=2) - bset.radii_sq).min(axis=1)
    worst = 0.0
    for kappa in kappas:
        _, h, lam, _ = composite_batch(bset, kappa, P)
        lower = hmin - np.log(len(bset)) / kappa
        worst = max(worst, float(np.max(lower - h)), float(np.max(h - hmin)))
    return CheckResult("smooth-min bounds", worst <= tol,
                       f"{n_states} states x kappa {list(kappas)}; worst violation {worst:.2e} (tol {tol:g})")


def _random_filter_instances(n, seed, box=5.0, nominal_box=3.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(n, 2)), rng.uniform(-nominal_box, nominal_box, size=(n, 2))


def closed_form_vs_qp(n=10_000, seed=1, kappa=2.0, gain=5.0, tol=1e-6, kkt_tol=1e-8):
    bset, system, alpha = default_barriers(), SingleIntegrator2D(), ClassKLinear(gain)
    X, U = _random_filter_instances(n, seed)
    gap = kkt = 0.0
    n_active = unconverged = 0
    for x, u in zip(X, U):
        res, _, comp = filter_pipeline(bset, kappa, system, alpha, x, u)
        qp = single_constraint_qp(comp.lie_f, comp.lie_g, comp.value, alpha, u)
        sol = solve_dual_ascent(qp, SolverConfig())
        unconverged += not sol.converged
        gap = max(gap, float(np.max(np.abs(sol.solution - res.safe_action))))
        kkt = max(kkt, kkt_residual(qp, res.safe_action, np.array([max(0.0, res.eta)])))
        n_active += res.active
    ok = gap <= tol and kkt <= kkt_tol and unconverged == 0
    return CheckResult("closed form vs QP", ok,
                       f"{n} instances ({n_active} active); max gap {gap:.2e} (tol {tol:g}); "
                       f"closed-form KKT residual {kkt:.2e} (tol {kkt_tol:g}); unconverged {unconverged}")


def jacobian_fd(n=1000, seed=2, step=1e-6, tol=1e-5, kappa=2.0, gain=5.0, eta_floor=1e-3):
    bset, system, alpha = default_barriers(), SingleIntegrator2D(), ClassKLinear(gain)
    rng = np.random.default_rng(seed)
    worst, used, tries = 0.0, 0, 0
    while used < n:
        tries += 1
        x = rng.uniform(-5.0, 5.0, 2)
        u = rng.uniform(-3.0, 3.0, 2)
        res, jac, comp = filter_pipeline(bset, kappa, system, alpha, x, u)
        if abs(res.eta) <= eta_floor:
            continue
        fd = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = step
            up = safe_action(comp.lie_f, comp.lie_g, comp.value, u + e, alpha).safe_action
            dn = safe_action(comp.lie_f, comp.lie_g, comp.value, u - e, alpha).safe_action
            fd[:, j] = (up - dn) / (2 * step)
        worst = max(worst, rel_err(jac.matrix, fd))
        used += 1
    return CheckResult("filter Jacobian vs finite differences", worst <= tol,
                       f"{n} points with |eta| > {eta_floor:g}; worst relative error {worst:.2e} (tol {tol:g})")


def _fd_grad(f, params, step):
    out = []
    for p in params:
        g = np.empty_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for k in range(flat.size):
            old = flat[k]
            flat[k] = old + step
            fp = f()
            flat[k] = old - step
            fm = f()
            flat[k] = old
            gflat[k] = (fp - fm) / (2 * step)
        out.append(g)
    return out


def mlp_gradients(n_nets=10, seed=3, step=1e-5, tol=1e-4):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_nets):
        depth = int(rng.integers(1, 4))
        sizes = tuple(int(s) for s in rng.integers(1, 7, size=depth + 1))
        net = Mlp.init(sizes, rng)
        for b in net.biases:
            b[:] = rng.normal(scale=0.3, size=b.shape)
        x = rng.normal(size=(int(rng.integers(1, 5)), sizes[0]))
        proj = rng.normal(size=(x.shape[0], sizes[-1]))

        def loss():
            return float(np.sum(proj * mlp_forward(net, x)[0]))

        _, tape = mlp_forward(net, x)
        grads, g_in = mlp_backward(net, tape, proj)
        fd = _fd_grad(loss, net.params + [x], step)
        worst = max(worst, rel_err(np.concatenate([g.ravel() for g in grads + [g_in]]),
                                   np.concatenate([g.ravel() for g in fd])))
    return CheckResult("MLP backprop vs finite differences", worst <= tol,
                       f"{n_nets} random nets; worst relative error {worst:.2e} (tol {tol:g})")


def gradient_probe_agent(seed=4, hidden=(64, 64)):
    """An untrained agent plus a 2-state batch with one active and one inactive filter row."""
    rng = np.random.default_rng(seed)
    env_cfg = EnvConfig()
    agent = SafeSacAgent(env_cfg, SacConfig(hidden=hidden), FilterConfig(), rng)
    # below obstacle 1 pushing up (active) and far from every obstacle (inactive)
    batch = {"obs": np.array([[1.05, 0.45], [-1.0, 3.0]])}
    eps = np.array([[0.3, 1.5], [-0.4, 0.2]])
    return agent, batch, eps


def policy_gradient_fd(seed=4, step=1e-5, tol=1e-4, hidden=(64, 64)):
    agent, batch, eps = gradient_probe_agent(seed, hidden)
    loss, grads, fo = policy_loss_and_grads(agent, batch, eps)
    active = fo.eta > 0
    # stay away from the kinks: eta = 0, the twin-critic min, and the log-std clamp
    ob = agent.obs(batch["obs"])
    q1, _ = q_forward(agent.critic.q1, ob, fo.safe_action)
    q2, _ = q_forward(agent.critic.q2, ob, fo.safe_action)
    raw = mlp_forward(agent.policy.net, ob)[0][:, agent.action_dim:]
    clear = (np.all(np.abs(fo.eta) > 1e-3) and np.all(np.abs(q1 - q2) > 1e-6)
             and np.all((raw > LOG_STD_MIN + 1e-3) & (raw < LOG_STD_MAX - 1e-3)))

    def f():
        return policy_loss_and_grads(agent, batch, eps)[0]

    fd = _fd_grad(f, agent.policy.net.params, step)
    err = rel_err(np.concatenate([g.ravel() for g in grads]), np.concatenate([g.ravel() for g in fd]))
    n_params = sum(p.size for p in agent.policy.net.params)
    ok = err <= tol and clear and active.any() and (~active).any()
    return CheckResult("policy gradient through safety layer vs finite differences", ok,
                       f"{n_params} policy parameters, 2 states (active rows {int(active.sum())}); "
                       f"relative error {err:.2e} (tol {tol:g}); away from kinks: {clear}")


def run_all(quick=True):
    """The ``check`` suite. ``quick`` shrinks sample counts, not tolerances."""
    if quick:
        return [
            smooth_min_bounds(n_states=20_000),
            closed_form_vs_qp(n=2000),
            jacobian_fd(n=300),
            mlp_gradients(n_nets=10),
            policy_gradient_fd(hidden=(16, 16)),
        ]
    return [smooth_min_bounds(), closed_form_vs_qp(), jacobian_fd(), mlp_gradients(), policy_gradient_fd()]
