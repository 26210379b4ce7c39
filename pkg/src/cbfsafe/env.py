"""Planar reach-avoid task: a single integrator must reach a goal disk while
circular obstacles are kept out by the closed-form safety layer."""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .barriers import BarrierSet, barrier_values, composite_value
from .dynamics import SingleIntegrator2D, step_euler
from .errors import ConfigError
from .safety_filter import ClassKLinear, filter_pipeline

DEFAULT_OBSTACLES = (
    {"center": [1.0, 1.0], "radius": 0.4},
    {"center": [2.0, 0.5], "radius": 0.3},
    {"center": [1.5, 2.0], "radius": 0.5},
)

MAX_RESET_TRIES = 1000


@dataclass
class EnvConfig:
    obstacles: BarrierSet = field(default_factory=lambda: BarrierSet.from_records(DEFAULT_OBSTACLES))
    goal_center: tuple = (3.0, 2.5)
    goal_radius: float = 0.2
    start_box: tuple = ((-0.3, -0.3), (0.3, 0.3))  # (low corner, high corner)
    dt: float = 0.02
    max_steps: int = 200
    reward_distance_weight: float = 1.0
    reward_goal_bonus: float = 100.0
    reward_action_weight: float = 0.01
    goal_relative_obs: bool = False

    def validate(self, alpha_gain=None):
        if not self.dt > 0:
            raise ConfigError("env.dt", "must be positive")
        if alpha_gain is not None and not self.dt * alpha_gain < 1.0:
            raise ConfigError("env.dt", f"dt * alpha_gain = {self.dt * alpha_gain:g} must be < 1")
        if not self.goal_radius > 0:
            raise ConfigError("env.goal_radius", "must be positive")
        if self.max_steps < 1:
            raise ConfigError("env.max_steps", "must be at least 1")
        lo, hi = np.asarray(self.start_box, dtype=float)
        if lo.shape != (2,) or np.any(lo > hi):
            raise ConfigError("env.start_box", "must be [[xlo, ylo], [xhi, yhi]] with lo <= hi")
        goal = np.asarray(self.goal_center, dtype=float)
        for i, b in enumerate(self.obstacles.barriers):
            c = np.asarray(b.center)
            if np.linalg.norm(goal - c) <= self.goal_radius + b.radius:
                raise ConfigError("env.obstacles", f"obstacle {i} overlaps the goal region")
            # nearest point of the start box to the obstacle center
            near = np.clip(c, lo, hi)
            if np.linalg.norm(near - c) <= b.radius:
                raise ConfigError("env.obstacles", f"obstacle {i} overlaps the start box")
        return self


@dataclass(frozen=True)
class StepResult:
    next_state: np.ndarray
    reward: float
    done: bool
    reached_goal: bool
    min_hi: float
    composite_h: float
    eta: float


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray  # the executed (filtered) action
    reward: float
    next_state: np.ndarray
    done: bool  # terminal: goal reached; time-limit truncation is not terminal


def reset(cfg, rng_seed, kappa=None):
    """Uniform start in ``cfg.start_box`` outside every obstacle.

    With ``kappa`` given the start must also lie strictly inside the composite
    safe set (h > 0), which is what forward invariance is stated for.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    lo, hi = np.asarray(cfg.start_box, dtype=float)
    for _ in range(MAX_RESET_TRIES):
        p = rng.uniform(lo, hi) if np.any(hi > lo) else lo.copy()
        if barrier_values(cfg.obstacles, p).min() <= 0:
            continue
        if kappa is not None and composite_value(cfg.obstacles, kappa, p) <= 0:
            continue
        return p
    raise ConfigError("env.start_box", f"no safe start found in {MAX_RESET_TRIES} draws")


def reward(cfg, state, action, next_state, reached):
    dist = np.linalg.norm(np.asarray(next_state)[:2] - np.asarray(cfg.goal_center))
    u = np.asarray(action, dtype=float)
    r = -cfg.reward_distance_weight * dist - cfg.reward_action_weight * float(u @ u)
    if reached:
        r += cfg.reward_goal_bonus
    return float(r)


_SYSTEM = SingleIntegrator2D()


def step(cfg, state, safe_action, step_index, kappa=2.0, eta=0.0):
    """Advance one Euler step with an already-filtered action and log safety values."""
    nxt = step_euler(_SYSTEM, state, safe_action, cfg.dt)
    reached = bool(np.linalg.norm(nxt - np.asarray(cfg.goal_center)) <= cfg.goal_radius)
    done = reached or step_index + 1 >= cfg.max_steps
    hv = barrier_values(cfg.obstacles, nxt)
    return StepResult(
        next_state=nxt,
        reward=reward(cfg, state, safe_action, nxt, reached),
        done=done,
        reached_goal=reached,
        min_hi=float(hv.min()),
        composite_h=composite_value(cfg.obstacles, kappa, nxt),
        eta=float(eta),
    )


TRACE_FIELDS_HEAD = ["episode", "step", "p_x", "p_y", "u_nom_x", "u_nom_y", "u_s_x", "u_s_y", "eta"]
TRACE_FIELDS_TAIL = ["composite_h", "reward", "done"]


def trace_fields(n_obstacles):
    return TRACE_FIELDS_HEAD + [f"h_{i + 1}" for i in range(n_obstacles)] + TRACE_FIELDS_TAIL


class ReachAvoidEnv:
    """Stateful wrapper: filters each nominal action, steps, and keeps a trace.

    Not thread-safe; use one instance per worker.
    """

    def __init__(self, cfg, kappa=2.0, alpha_gain=5.0):
        self.cfg = cfg
        self.kappa = kappa
        self.alpha = ClassKLinear(alpha_gain)
        self.system = _SYSTEM
        self.state = None
        self.t = 0
        self.episode = -1
        self.trace: List[list] = []
        self.record = True

    def observe(self, state=None):
        p = self.state if state is None else state
        if self.cfg.goal_relative_obs:
            return np.asarray(p) - np.asarray(self.cfg.goal_center)
        return np.asarray(p).copy()

    def reset(self, seed):
        self.state = reset(self.cfg, seed, kappa=self.kappa)
        self.t = 0
        self.episode += 1
        return self.state.copy()

    def filter(self, nominal):
        return filter_pipeline(self.cfg.obstacles, self.kappa, self.system, self.alpha, self.state, nominal)

    def step(self, nominal):
        res, _, _ = self.filter(nominal)
        out = step(self.cfg, self.state, res.safe_action, self.t, kappa=self.kappa, eta=res.eta)
        if self.record:
            hv = barrier_values(self.cfg.obstacles, out.next_state)
            self.trace.append(
                [self.episode, self.t, *out.next_state[:2], *nominal, *res.safe_action, out.eta,
                 *hv, out.composite_h, out.reward, int(out.done)]
            )
        prev = self.state
        self.state = out.next_state
        self.t += 1
        return out, Transition(prev, res.safe_action, out.reward, out.next_state, out.reached_goal)
