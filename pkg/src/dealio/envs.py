"""Desk-scale environments with ground-truth cost functions, plus rollout collection.

The true cost of an environment is an evaluation and expert-training signal
only; imitation never reads it. Both environments keep their transition maps
(piecewise) affine so per-step linear-Gaussian models can represent them well.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import TAG_ACTIONS, TAG_RESET, derive_seed, make_rng
from .types import QuadraticCost, Trajectory, TvlgController

__all__ = [
    "EnvSpec",
    "LtiEnv",
    "DiscEnv",
    "RolloutDivergence",
    "make_lti_env",
    "make_disc_env",
    "build_env",
    "rollout",
    "rollout_with_return",
    "true_return",
]


@dataclass(frozen=True)
class EnvSpec:
    name: str
    n: int
    m: int
    T: int
    dt: float

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.T < 1 or self.dt <= 0:
            raise ValueError("EnvSpec requires n, m, T positive and dt > 0")


class RolloutDivergence(RuntimeError):
    """Raised when a rollout produces a non-finite state."""

    def __init__(self, step: int):
        super().__init__(f"rollout diverged to a non-finite state at step {step}")
        self.step = step


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class LtiEnv:
    """Exactly linear test environment: s' = A s + B a + d + noise.

    Useful as a verification bed: with noise_std=0 the one-step map is
    reproduced exactly by a fitted linear-Gaussian model with F=[A B], f=d.
    """

    spec: EnvSpec
    A: np.ndarray
    B: np.ndarray
    d: np.ndarray
    noise_std: float
    x0: np.ndarray
    true_cost: QuadraticCost
    start_jitter: float = 0.0

    def __post_init__(self):
        n, m = self.spec.n, self.spec.m
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        d = np.asarray(self.d, dtype=float)
        x0 = np.asarray(self.x0, dtype=float)
        if A.shape != (n, n) or B.shape != (n, m) or d.shape != (n,) or x0.shape != (n,):
            raise ValueError("LtiEnv matrix shapes disagree with spec")
        if self.noise_std < 0 or self.start_jitter < 0:
            raise ValueError("noise_std and start_jitter must be >= 0")
        if (self.true_cost.n, self.true_cost.m, self.true_cost.T) != (n, m, self.spec.T):
            raise ValueError("true_cost dimensions disagree with spec")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "x0", x0)

    def reset(self, seed: int) -> np.ndarray:
        rng = make_rng(seed, TAG_RESET)
        return self.x0 + self.start_jitter * rng.standard_normal(self.spec.n)

    def step(self, state, action, rng=None, t: int = 0):
        state = np.asarray(state, dtype=float)
        action = np.asarray(action, dtype=float)
        _check_finite("state", state)
        _check_finite("action", action)
        nxt = self.A @ state + self.B @ action + self.d
        if self.noise_std > 0:
            if rng is None:
                raise ValueError("rng required when noise_std > 0")
            nxt = nxt + self.noise_std * rng.standard_normal(self.spec.n)
        return nxt, self.step_cost(t, state, nxt, action)

    def step_cost(self, t, s, s_next, a) -> float:
        return self.true_cost.evaluate(t, s, a)

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.asarray(action, dtype=float)

    def quadratize_cost(self, mean_states) -> QuadraticCost:
        return self.true_cost


@dataclass(frozen=True)
class DiscEnv:
    """Point particle on a disc: reach the red target, then the green one.

    State (10-d): [pos(2), vel(2), pos-target_red(2), pos-target_green(2),
    reached_red_flag(1), t/T(1)]. Action (2-d): force, clamped to a box.
    The flag flips permanently once the particle comes within switch_radius
    of the red target; away from that switch the step map is exactly affine.
    """

    spec: EnvSpec
    mass: float = 1.0
    damping: float = 1.0
    target_red: np.ndarray = (1.0, 0.0)
    target_green: np.ndarray = (-1.0, 0.0)
    switch_radius: float = 0.25
    x0: np.ndarray = (0.0, -1.0)
    action_limit: float = 10.0
    action_cost_weight: float = 1e-3
    start_jitter: float = 0.0

    def __post_init__(self):
        if self.spec.n != 10 or self.spec.m != 2:
            raise ValueError("DiscEnv is 10-d state / 2-d action")
        if self.mass <= 0 or self.damping <= 0 or self.switch_radius <= 0:
            raise ValueError("mass, damping, switch_radius must be positive")
        object.__setattr__(self, "target_red", np.asarray(self.target_red, dtype=float))
        object.__setattr__(self, "target_green", np.asarray(self.target_green, dtype=float))
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))

    def _assemble(self, pos, vel, flag, time_frac):
        return np.concatenate(
            [pos, vel, pos - self.target_red, pos - self.target_green, [flag], [time_frac]]
        )

    def reset(self, seed: int) -> np.ndarray:
        rng = make_rng(seed, TAG_RESET)
        pos = self.x0 + self.start_jitter * rng.standard_normal(2)
        return self._assemble(pos, np.zeros(2), 0.0, 0.0)

    def step(self, state, action, rng=None, t: int = 0):
        state = np.asarray(state, dtype=float)
        action = np.asarray(action, dtype=float)
        _check_finite("state", state)
        _check_finite("action", action)
        force = np.clip(action, -self.action_limit, self.action_limit)
        pos, vel, flag = state[0:2], state[2:4], state[8]
        # Semi-implicit Euler keeps the map affine in (pos, vel, force).
        new_vel = vel + self.spec.dt * (force - self.damping * vel) / self.mass
        new_pos = pos + self.spec.dt * new_vel
        # Switch is decided on the pre-step position: standing on the red
        # target with flag 0 guarantees the flag reads 1 in the next state.
        if flag >= 0.5 or np.linalg.norm(pos - self.target_red) <= self.switch_radius:
            new_flag = 1.0
        else:
            new_flag = 0.0
        new_time = state[9] + 1.0 / self.spec.T
        nxt = self._assemble(new_pos, new_vel, new_flag, new_time)
        return nxt, self.step_cost(t, state, nxt, force)

    def step_cost(self, t, s, s_next, a) -> float:
        s = np.asarray(s, dtype=float)
        a = np.asarray(a, dtype=float)
        target = self.target_green if s[8] >= 0.5 else self.target_red
        pos = s[0:2]
        return float(np.sum((pos - target) ** 2) + self.action_cost_weight * np.sum(a**2))

    def clip_action(self, action: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(action, dtype=float), -self.action_limit, self.action_limit)

    def quadratize_cost(self, mean_states) -> QuadraticCost:
        """Time-indexed quadratic cost with the active target chosen per step
        from the mean state's flag. Exact wherever all samples share a flag."""
        n, m, T = self.spec.n, self.spec.m, self.spec.T
        C = np.zeros((T, n + m, n + m))
        c = np.zeros((T, n + m))
        cc = np.zeros(T)
        for t in range(T):
            target = self.target_green if mean_states[t][8] >= 0.5 else self.target_red
            C[t, 0, 0] = C[t, 1, 1] = 2.0
            C[t, n, n] = C[t, n + 1, n + 1] = 2.0 * self.action_cost_weight
            c[t, 0:2] = -2.0 * target
            cc[t] = float(target @ target)
        return QuadraticCost(
            C=C, c=c, cc=cc, C_term=np.zeros((n, n)), c_term=np.zeros(n), cc_term=0.0
        )


def make_lti_env(
    T: int = 40,
    noise_std: float = 0.01,
    start_jitter: float = 0.0,
    target: float = 0.0,
) -> LtiEnv:
    """A small stable 2-d single-input system driven toward a target position."""
    dt = 0.1
    spec = EnvSpec(name="lti", n=2, m=1, T=T, dt=dt)
    A = np.array([[1.0, dt], [0.0, 0.9]])
    B = np.array([[0.0], [dt]])
    d = np.zeros(2)
    C = np.zeros((T, 3, 3))
    c = np.zeros((T, 3))
    C[:, 0, 0] = 2.0
    C[:, 1, 1] = 0.2
    C[:, 2, 2] = 0.02
    c[:, 0] = -2.0 * target
    cost = QuadraticCost(
        C=C,
        c=c,
        cc=np.full(T, target * target),
        C_term=np.zeros((2, 2)),
        c_term=np.zeros(2),
        cc_term=0.0,
    )
    return LtiEnv(
        spec=spec,
        A=A,
        B=B,
        d=d,
        noise_std=noise_std,
        x0=np.array([1.0, 0.0]),
        true_cost=cost,
        start_jitter=start_jitter,
    )


def make_disc_env(T: int = 100, **overrides) -> DiscEnv:
    spec = EnvSpec(name="disc", n=10, m=2, T=T, dt=0.05)
    return DiscEnv(spec=spec, **overrides)


def build_env(name: str, T: int | None = None, **overrides):
    if name == "disc":
        return make_disc_env(**({"T": T} if T else {}), **overrides)
    if name == "lti":
        return make_lti_env(**({"T": T} if T else {}), **overrides)
    raise ValueError(f"unknown environment '{name}' (expected 'disc' or 'lti')")


def rollout_with_return(env, ctrl: TvlgController, seed: int, stochastic: bool = True):
    """Roll the controller out once; returns (trajectory, cumulative true cost)."""
    spec = env.spec
    if ctrl.T != spec.T:
        raise ValueError(f"controller horizon {ctrl.T} != environment horizon {spec.T}")
    if ctrl.n != spec.n or ctrl.m != spec.m:
        raise ValueError("controller dimensions disagree with environment")
    rng = make_rng(seed, TAG_ACTIONS)
    states = np.empty((spec.T + 1, spec.n))
    actions = np.empty((spec.T, spec.m))
    states[0] = env.reset(seed)
    total_cost = 0.0
    for t in range(spec.T):
        if stochastic:
            a = ctrl.sample_action(t, states[t], rng)
        else:
            a = ctrl.mean_action(t, states[t])
        # Record the action the environment actually applies so fitted
        # dynamics stay consistent with the observed motion.
        a = env.clip_action(a)
        nxt, cost = env.step(states[t], a, rng=rng, t=t)
        if not np.all(np.isfinite(nxt)):
            raise RolloutDivergence(t)
        states[t + 1] = nxt
        actions[t] = a
        total_cost += cost
    return Trajectory(states=states, actions=actions), total_cost


def rollout(env, ctrl: TvlgController, seed: int, stochastic: bool = True) -> Trajectory:
    traj, _ = rollout_with_return(env, ctrl, seed, stochastic)
    return traj


def true_return(env, ctrl: TvlgController, num_eval_rollouts: int, seed: int) -> float:
    """Mean negated cumulative true cost over stochastic rollouts (higher is better)."""
    if num_eval_rollouts < 1:
        raise ValueError("num_eval_rollouts must be >= 1")
    totals = []
    for i in range(num_eval_rollouts):
        _, cost = rollout_with_return(env, ctrl, derive_seed(seed, i), stochastic=True)
        totals.append(-cost)
    return float(np.mean(totals))
