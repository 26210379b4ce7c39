"""Squashed-Gaussian policy and twin Q critics."""
from dataclasses import dataclass

import numpy as np

from .mlp import Mlp, mlp_backward, mlp_forward

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class PolicyNet:
    """Trunk + (mean, log-std) heads, packed as one Mlp whose output is [mu | log_std]."""

    net: Mlp
    action_dim: int
    action_scale: float = 2.0

    @classmethod
    def init(cls, obs_dim, action_dim, hidden, rng, action_scale=2.0):
        net = Mlp.init((obs_dim, *hidden, 2 * action_dim), rng, final_scale=0.1)
        return cls(net, action_dim, action_scale)


def _log1m_tanh_sq(x):
    # log(1 - tanh(x)^2) without cancellation for large |x|
    return 2.0 * (np.log(2.0) - x - np.logaddexp(0.0, -2.0 * x))


def policy_forward(policy, X, eps):
    """Reparameterised sample u_bar = scale * tanh(mu + sigma * eps) and its log-density."""
    out, tape = mlp_forward(policy.net, np.atleast_2d(X))
    m = policy.action_dim
    mu = out[:, :m]
    raw = out[:, m:]
    log_std = np.clip(raw, LOG_STD_MIN, LOG_STD_MAX)
    std = np.exp(log_std)
    eps = np.atleast_2d(eps)
    pre = mu + std * eps
    t = np.tanh(pre)
    ubar = policy.action_scale * t
    logp = (
        np.sum(-0.5 * eps**2 - log_std - _HALF_LOG_2PI, axis=1)
        - np.sum(_log1m_tanh_sq(pre), axis=1)
        - m * np.log(policy.action_scale)
    )
    cache = dict(tape=tape, raw=raw, std=std, eps=eps, t=t)
    return ubar, logp, cache


def policy_backward(policy, cache, g_ubar, g_logp):
    """Parameter gradients given cotangents on u_bar (B, m) and log-prob (B,)."""
    t, std, eps = cache["t"], cache["std"], cache["eps"]
    g_logp = g_logp[:, None]
    g_pre = g_ubar * policy.action_scale * (1.0 - t**2) + g_logp * 2.0 * t
    g_mu = g_pre
    inside = (cache["raw"] > LOG_STD_MIN) & (cache["raw"] < LOG_STD_MAX)
    g_log_std = np.where(inside, g_pre * std * eps - g_logp, 0.0)
    grads, _ = mlp_backward(policy.net, cache["tape"], np.concatenate([g_mu, g_log_std], axis=1))
    return grads


def policy_mean_action(policy, X):
    out, _ = mlp_forward(policy.net, np.atleast_2d(X))
    return policy.action_scale * np.tanh(out[:, : policy.action_dim])


def policy_sample(policy, x, rng):
    """Draw one nominal action for state ``x``; returns ``(u_bar, log_prob)``."""
    eps = rng.standard_normal(policy.action_dim)
    ubar, logp, _ = policy_forward(policy, x, eps)
    return ubar[0], float(logp[0])


@dataclass
class CriticNet:
    q1: Mlp
    q2: Mlp
    target1: Mlp
    target2: Mlp

    @classmethod
    def init(cls, obs_dim, action_dim, hidden, rng):
        sizes = (obs_dim + action_dim, *hidden, 1)
        q1 = Mlp.init(sizes, rng)
        q2 = Mlp.init(sizes, rng)
        return cls(q1, q2, q1.copy(), q2.copy())


def q_forward(net, X, U):
    out, tape = mlp_forward(net, np.concatenate([X, U], axis=1))
    return out[:, 0], tape


def q_backward(net, tape, g_q, action_dim):
    """Returns (parameter gradients, gradient w.r.t. the action inputs)."""
    grads, g_in = mlp_backward(net, tape, g_q[:, None])
    return grads, g_in[:, -action_dim:]
