"""Soft actor-critic with an analytic safety layer."""
from .buffer import NotReady, ReplayBuffer
from .mlp import Adam, Mlp, mlp_backward, mlp_forward
from .nets import CriticNet, PolicyNet, policy_forward, policy_mean_action, policy_sample
from .sac import (
    FilterConfig,
    SacConfig,
    SafeSacAgent,
    TrainResult,
    critic_loss_and_grads,
    critic_update,
    evaluate,
    policy_loss_and_grads,
    policy_update,
    soft_update,
    train,
)

__all__ = [
    "NotReady",
    "ReplayBuffer",
    "Adam",
    "Mlp",
    "mlp_backward",
    "mlp_forward",
    "CriticNet",
    "PolicyNet",
    "policy_forward",
    "policy_mean_action",
    "policy_sample",
    "FilterConfig",
    "SacConfig",
    "SafeSacAgent",
    "TrainResult",
    "critic_loss_and_grads",
    "critic_update",
    "evaluate",
    "policy_loss_and_grads",
    "policy_update",
    "soft_update",
    "train",
]
