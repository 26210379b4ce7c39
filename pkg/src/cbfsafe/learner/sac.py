"""Soft actor-critic with the closed-form safety layer as the last policy stage.

The executed action is u_s = filter(x, u_bar) with u_bar the squashed
Gaussian sample.  Critic targets use the filtered next action; the policy
gradient of the Q term flows through the filter's analytic Jacobian and then
through the tanh head.  The entropy term is evaluated at the pre-filter
sample u_bar, since the filtered action has no tractable density.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..barriers import barrier_values, composite_value
from ..dynamics import SingleIntegrator2D
from ..env import EnvConfig, ReachAvoidEnv
from ..errors import ConfigError, ParameterError, ShapeError, TrainingDivergedError
from ..safety_filter import filter_batch, filter_vjp
from .buffer import NotReady, ReplayBuffer
from .mlp import Adam
from .nets import CriticNet, PolicyNet, policy_backward, policy_forward, policy_mean_action, q_backward, q_forward

log = logging.getLogger(__name__)


@dataclass
class SacConfig:
    gamma: float = 0.99
    tau: float = 0.005
    entropy_alpha: float = 0.2
    learning_rate: float = 3e-4
    batch_size: int = 256
    episodes: int = 1000
    updates_per_step: int = 1
    warmup_steps: int = 1000
    buffer_capacity: int = 100_000
    hidden: tuple = (64, 64)
    action_scale: float = 2.0

    def validate(self):
        checks = [
            ("gamma", 0 < self.gamma < 1, "must be in (0, 1)"),
            ("tau", 0 < self.tau < 1, "must be in (0, 1)"),
            ("entropy_alpha", self.entropy_alpha >= 0, "must be >= 0"),
            ("learning_rate", self.learning_rate > 0, "must be > 0"),
            ("batch_size", self.batch_size >= 1, "must be >= 1"),
            ("episodes", self.episodes >= 1, "must be >= 1"),
            ("updates_per_step", self.updates_per_step >= 1, "must be >= 1"),
            ("warmup_steps", self.warmup_steps >= 0, "must be >= 0"),
            ("buffer_capacity", self.buffer_capacity >= 1, "must be >= 1"),
            ("hidden", len(self.hidden) >= 1 and min(self.hidden) >= 1, "needs positive widths"),
            ("action_scale", self.action_scale > 0, "must be > 0"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"sac.{key}", msg)
        return self


@dataclass
class FilterConfig:
    kappa: float = 2.0
    alpha_gain: float = 5.0


class SafeSacAgent:
    def __init__(self, env_cfg, sac_cfg, filter_cfg, rng, system=None):
        self.env_cfg = env_cfg
        self.cfg = sac_cfg
        self.filter_cfg = filter_cfg
        self.system = system or SingleIntegrator2D()
        self.bset = env_cfg.obstacles
        n, m = self.system.n, self.system.m
        self.action_dim = m
        self.obs_offset = -np.asarray(env_cfg.goal_center, float) if env_cfg.goal_relative_obs else np.zeros(n)
        self.policy = PolicyNet.init(n, m, sac_cfg.hidden, rng, sac_cfg.action_scale)
        self.critic = CriticNet.init(n, m, sac_cfg.hidden, rng)
        self.policy_opt = Adam(self.policy.net.params, sac_cfg.learning_rate)
        self.critic_opt = Adam(self.critic.q1.params + self.critic.q2.params, sac_cfg.learning_rate)

    def obs(self, states):
        return states + self.obs_offset

    def filter(self, states, ubar):
        return filter_batch(self.bset, self.filter_cfg.kappa, self.system, self.filter_cfg.alpha_gain, states, ubar)

    def act(self, state, rng, deterministic=False):
        """Nominal (pre-filter) action for one state."""
        x = self.obs(np.asarray(state, float))[None, :]
        if deterministic:
            return policy_mean_action(self.policy, x)[0]
        eps = rng.standard_normal((1, self.action_dim))
        return policy_forward(self.policy, x, eps)[0][0]


def critic_loss_and_grads(agent, batch, eps_next):
    """Twin-critic squared TD loss and its gradients (q1 params then q2 params)."""
    cfg = agent.cfg
    xn = batch["next_obs"]
    ubar_n, logp_n, _ = policy_forward(agent.policy, agent.obs(xn), eps_next)
    us_n = agent.filter(xn, ubar_n).safe_action
    qt1, _ = q_forward(agent.critic.target1, agent.obs(xn), us_n)
    qt2, _ = q_forward(agent.critic.target2, agent.obs(xn), us_n)
    v_next = np.minimum(qt1, qt2) - cfg.entropy_alpha * logp_n
    y = batch["rewards"] + cfg.gamma * (1.0 - batch["dones"]) * v_next

    ob = agent.obs(batch["obs"])
    q1, tape1 = q_forward(agent.critic.q1, ob, batch["actions"])
    q2, tape2 = q_forward(agent.critic.q2, ob, batch["actions"])
    nb = y.shape[0]
    loss = 0.5 * np.mean((q1 - y) ** 2) + 0.5 * np.mean((q2 - y) ** 2)
    g1, _ = q_backward(agent.critic.q1, tape1, (q1 - y) / nb, agent.action_dim)
    g2, _ = q_backward(agent.critic.q2, tape2, (q2 - y) / nb, agent.action_dim)
    return float(loss), g1 + g2, y


def policy_loss_and_grads(agent, batch, eps):
    """mean[alpha_e log pi(u_bar|x) - min(Q1, Q2)(x, filter(x, u_bar))] and d/dphi."""
    cfg = agent.cfg
    x = batch["obs"]
    ob = agent.obs(x)
    ubar, logp, cache = policy_forward(agent.policy, ob, eps)
    fo = agent.filter(x, ubar)
    q1, tape1 = q_forward(agent.critic.q1, ob, fo.safe_action)
    q2, tape2 = q_forward(agent.critic.q2, ob, fo.safe_action)
    first = q1 <= q2
    qmin = np.where(first, q1, q2)
    nb = x.shape[0]
    loss = np.mean(cfg.entropy_alpha * logp - qmin)

    _, gu1 = q_backward(agent.critic.q1, tape1, np.where(first, -1.0 / nb, 0.0), agent.action_dim)
    _, gu2 = q_backward(agent.critic.q2, tape2, np.where(first, 0.0, -1.0 / nb), agent.action_dim)
    g_ubar = filter_vjp(fo.lie_g, fo.eta, gu1 + gu2)
    g_logp = np.full(nb, cfg.entropy_alpha / nb)
    grads = policy_backward(agent.policy, cache, g_ubar, g_logp)
    return float(loss), grads, fo


def soft_update(target, online, tau):
    """target <- tau * online + (1 - tau) * target, in place."""
    if target.layer_sizes != online.layer_sizes:
        raise ShapeError("target and online networks differ in shape")
    for pt, po in zip(target.params, online.params):
        pt *= 1.0 - tau
        pt += tau * po
    return target


def _check_finite(loss, what, batch):
    if not np.isfinite(loss):
        raise TrainingDivergedError(f"{what} loss is {loss}", dump={k: v.copy() for k, v in batch.items()})


def critic_update(agent, batch, rng):
    eps_next = rng.standard_normal((batch["obs"].shape[0], agent.action_dim))
    loss, grads, _ = critic_loss_and_grads(agent, batch, eps_next)
    _check_finite(loss, "critic", batch)
    agent.critic_opt.step(grads)
    return loss


def policy_update(agent, batch, rng):
    eps = rng.standard_normal((batch["obs"].shape[0], agent.action_dim))
    loss, grads, _ = policy_loss_and_grads(agent, batch, eps)
    _check_finite(loss, "policy", batch)
    agent.policy_opt.step(grads)
    return loss


METRIC_FIELDS = ["episode", "return", "steps", "min_hi_episode", "min_composite_h_episode", "policy_loss", "critic_loss"]


@dataclass
class TrainResult:
    agent: SafeSacAgent
    metrics: List[dict]
    traces: Optional[List[list]] = None
    total_steps: int = 0
    param_updates: int = 0


def episode_seed(seed, episode):
    """Independent RNG stream per episode so runs are order-independent."""
    return np.random.default_rng([int(seed), int(episode)])


def train(env_cfg=None, sac_cfg=None, filter_cfg=None, seed=0, record_traces=False, progress=None):
    env_cfg = env_cfg or EnvConfig()
    sac_cfg = (sac_cfg or SacConfig()).validate()
    filter_cfg = filter_cfg or FilterConfig()
    if not filter_cfg.kappa > 0 or not filter_cfg.alpha_gain > 0:
        raise ParameterError("kappa and alpha_gain must be positive")
    env_cfg.validate(filter_cfg.alpha_gain)

    init_ss, act_ss, batch_ss = np.random.SeedSequence(seed).spawn(3)
    agent = SafeSacAgent(env_cfg, sac_cfg, filter_cfg, np.random.default_rng(init_ss))
    act_rng = np.random.default_rng(act_ss)
    batch_rng = np.random.default_rng(batch_ss)
    env = ReachAvoidEnv(env_cfg, filter_cfg.kappa, filter_cfg.alpha_gain)
    env.record = record_traces
    buf = ReplayBuffer(agent.system.n, agent.action_dim, sac_cfg.buffer_capacity)
    scale = sac_cfg.action_scale

    metrics = []
    total = 0
    updates = 0
    for ep in range(sac_cfg.episodes):
        state = env.reset(episode_seed(seed, ep))
        ret = 0.0
        min_hi = float(barrier_values(env_cfg.obstacles, state).min())
        min_h = composite_value(env_cfg.obstacles, filter_cfg.kappa, state)
        p_losses, c_losses = [], []
        while True:
            if total < sac_cfg.warmup_steps:
                nominal = act_rng.uniform(-scale, scale, agent.action_dim)
            else:
                nominal = agent.act(state, act_rng)
            out, tr = env.step(nominal)
            buf.add(tr.state, tr.action, tr.reward, tr.next_state, tr.done)
            total += 1
            ret += out.reward
            min_hi = min(min_hi, out.min_hi)
            min_h = min(min_h, out.composite_h)
            state = out.next_state
            if total >= sac_cfg.warmup_steps:
                for _ in range(sac_cfg.updates_per_step):
                    try:
                        batch = buf.sample(sac_cfg.batch_size, batch_rng)
                    except NotReady:
                        break
                    c_losses.append(critic_update(agent, batch, batch_rng))
                    p_losses.append(policy_update(agent, batch, batch_rng))
                    soft_update(agent.critic.target1, agent.critic.q1, sac_cfg.tau)
                    soft_update(agent.critic.target2, agent.critic.q2, sac_cfg.tau)
                    updates += 1
            if out.done:
                break
        row = {
            "episode": ep,
            "return": ret,
            "steps": env.t,
            "min_hi_episode": min_hi,
            "min_composite_h_episode": min_h,
            "policy_loss": float(np.mean(p_losses)) if p_losses else float("nan"),
            "critic_loss": float(np.mean(c_losses)) if c_losses else float("nan"),
        }
        metrics.append(row)
        if progress is not None:
            progress(row)
        elif ep % 50 == 0:
            log.info("episode %d return %.1f steps %d min_h %.4f", ep, ret, env.t, min_h)
    return TrainResult(agent, metrics, env.trace if record_traces else None, total, updates)


def evaluate(agent, n_episodes, seed, deterministic=True, record_traces=False, eval_offset=10_000_000):
    """Roll out ``n_episodes`` with the filtered policy.

    Episode k uses the RNG stream (seed, eval_offset + k), disjoint from
    training streams.
    """
    env_cfg = agent.env_cfg
    env = ReachAvoidEnv(env_cfg, agent.filter_cfg.kappa, agent.filter_cfg.alpha_gain)
    env.record = record_traces
    rows, starts = [], []
    for k in range(n_episodes):
        rng = episode_seed(seed, eval_offset + k)
        state = env.reset(rng)
        starts.append(state.copy())
        ret, min_hi = 0.0, float(barrier_values(env_cfg.obstacles, state).min())
        min_h = composite_value(env_cfg.obstacles, agent.filter_cfg.kappa, state)
        reached = False
        while True:
            out, _ = env.step(agent.act(state, rng, deterministic=deterministic))
            ret += out.reward
            min_hi = min(min_hi, out.min_hi)
            min_h = min(min_h, out.composite_h)
            state = out.next_state
            reached = out.reached_goal
            if out.done:
                break
        rows.append(dict(episode=k, **{"return": ret}, steps=env.t, reached_goal=reached,
                         min_hi_episode=min_hi, min_composite_h_episode=min_h))
    return rows, (env.trace if record_traces else None), starts
