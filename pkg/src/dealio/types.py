"""Shared domain types: rollouts, controllers, local models, quadratic costs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Trajectory",
    "Demonstration",
    "DemonstrationSet",
    "TvlgController",
    "LinearGaussianDynamics",
    "QuadraticCost",
    "transitions",
    "normalized_score",
]


def _as_float_array(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class Trajectory:
    """One rollout: T+1 states (n-dim) and the T actions (m-dim) that produced them."""

    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        states = _as_float_array(self.states, "states")
        actions = _as_float_array(self.actions, "actions")
        if states.ndim != 2 or actions.ndim != 2:
            raise ValueError("states and actions must be 2-d arrays")
        if states.shape[0] != actions.shape[0] + 1:
            raise ValueError(
                f"need exactly one more state than actions, got "
                f"{states.shape[0]} states / {actions.shape[0]} actions"
            )
        if actions.shape[0] < 1 or states.shape[1] < 1 or actions.shape[1] < 1:
            raise ValueError("require T >= 1, n >= 1, m >= 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.actions.shape[1]

    @property
    def T(self) -> int:
        return self.actions.shape[0]


@dataclass(frozen=True)
class Demonstration:
    """A state-only rollout; carries no action information."""

    states: np.ndarray

    def __post_init__(self):
        states = _as_float_array(self.states, "states")
        if states.ndim != 2:
            raise ValueError("states must be a 2-d array")
        if states.shape[0] < 2 or states.shape[1] < 1:
            raise ValueError("require T >= 1 and n >= 1")
        object.__setattr__(self, "states", states)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def T(self) -> int:
        return self.states.shape[0] - 1


@dataclass(frozen=True)
class DemonstrationSet:
    """Homogeneous collection of demonstrations sharing state dimension and horizon."""

    demos: tuple
    n: int
    T: int

    def __post_init__(self):
        demos = tuple(self.demos)
        if not demos:
            raise ValueError("demonstration set is empty")
        for d in demos:
            if not isinstance(d, Demonstration):
                raise TypeError("demos must contain Demonstration objects")
            if d.n != self.n or d.T != self.T:
                raise ValueError(
                    f"demonstration with n={d.n}, T={d.T} does not match "
                    f"set n={self.n}, T={self.T}"
                )
        object.__setattr__(self, "demos", demos)

    def __len__(self) -> int:
        return len(self.demos)

    @classmethod
    def from_demos(cls, demos) -> "DemonstrationSet":
        demos = tuple(demos)
        if not demos:
            raise ValueError("demonstration set is empty")
        return cls(demos=demos, n=demos[0].n, T=demos[0].T)


@dataclass(frozen=True)
class TvlgController:
    """Time-varying linear-Gaussian policy a_t ~ N(K_t s_t + k_t, cov_t).

    K is stacked (T, m, n), k is (T, m), cov is (T, m, m) with every cov_t
    symmetric positive definite.
    """

    K: np.ndarray
    k: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        K = _as_float_array(self.K, "K")
        k = _as_float_array(self.k, "k")
        cov = _as_float_array(self.cov, "cov")
        if K.ndim != 3 or k.ndim != 2 or cov.ndim != 3:
            raise ValueError("K must be (T,m,n), k (T,m), cov (T,m,m)")
        T, m, n = K.shape
        if k.shape != (T, m) or cov.shape != (T, m, m):
            raise ValueError("K, k, cov shapes disagree")
        if not np.allclose(cov, np.swapaxes(cov, 1, 2), atol=1e-12):
            raise ValueError("cov_t must be symmetric")
        for t in range(T):
            try:
                np.linalg.cholesky(cov[t])
            except np.linalg.LinAlgError:
                raise ValueError(f"cov_{t} is not positive definite") from None
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "cov", cov)

    @property
    def T(self) -> int:
        return self.K.shape[0]

    @property
    def m(self) -> int:
        return self.K.shape[1]

    @property
    def n(self) -> int:
        return self.K.shape[2]

    def mean_action(self, t: int, s: np.ndarray) -> np.ndarray:
        return self.K[t] @ s + self.k[t]

    def sample_action(self, t: int, s: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        mean = self.mean_action(t, s)
        chol = np.linalg.cholesky(self.cov[t])
        return mean + chol @ rng.standard_normal(self.m)


@dataclass(frozen=True)
class LinearGaussianDynamics:
    """Per-step local model s_{t+1} ~ N(F_t [s_t; a_t] + f_t, Sigma_t).

    F is stacked (T, n, n+m), f is (T, n), Sigma is (T, n, n) symmetric PSD
    with a strictly positive diagonal floor.
    """

    F: np.ndarray
    f: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        F = _as_float_array(self.F, "F")
        f = _as_float_array(self.f, "f")
        Sigma = _as_float_array(self.Sigma, "Sigma")
        if F.ndim != 3 or f.ndim != 2 or Sigma.ndim != 3:
            raise ValueError("F must be (T,n,n+m), f (T,n), Sigma (T,n,n)")
        T, n, nm = F.shape
        if nm <= n:
            raise ValueError("F must have more columns than rows (n+m > n)")
        if f.shape != (T, n) or Sigma.shape != (T, n, n):
            raise ValueError("F, f, Sigma shapes disagree")
        if not np.allclose(Sigma, np.swapaxes(Sigma, 1, 2), atol=1e-12):
            raise ValueError("Sigma_t must be symmetric")
        for t in range(T):
            if np.min(np.linalg.eigvalsh(Sigma[t])) <= 0:
                raise ValueError(f"Sigma_{t} must be positive definite after flooring")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "Sigma", Sigma)

    @property
    def T(self) -> int:
        return self.F.shape[0]

    @property
    def n(self) -> int:
        return self.F.shape[1]

    @property
    def m(self) -> int:
        return self.F.shape[2] - self.F.shape[1]

    def F_s(self, t: int) -> np.ndarray:
        """State partition of F_t (first n columns)."""
        return self.F[t, :, : self.n]

    def F_a(self, t: int) -> np.ndarray:
        """Action partition of F_t (last m columns)."""
        return self.F[t, :, self.n :]


@dataclass(frozen=True)
class QuadraticCost:
    """Time-indexed quadratic cost over state-action pairs plus a terminal term.

    Per step: 0.5 z^T C_t z + z^T c_t + cc_t with z = [s; a].
    Terminal: 0.5 s^T C_term s + s^T c_term + cc_term (zero by default in this
    artifact; kept explicit so finite-horizon recursions are well posed).
    """

    C: np.ndarray
    c: np.ndarray
    cc: np.ndarray
    C_term: np.ndarray
    c_term: np.ndarray
    cc_term: float

    def __post_init__(self):
        C = _as_float_array(self.C, "C")
        c = _as_float_array(self.c, "c")
        cc = _as_float_array(self.cc, "cc")
        C_term = _as_float_array(self.C_term, "C_term")
        c_term = _as_float_array(self.c_term, "c_term")
        if C.ndim != 3 or c.ndim != 2 or cc.ndim != 1:
            raise ValueError("C must be (T,n+m,n+m), c (T,n+m), cc (T,)")
        T, nm, nm2 = C.shape
        if nm != nm2 or c.shape != (T, nm) or cc.shape != (T,):
            raise ValueError("C, c, cc shapes disagree")
        n = C_term.shape[0]
        if C_term.shape != (n, n) or c_term.shape != (n,) or n >= nm:
            raise ValueError("terminal term shapes disagree with running cost")
        if not np.allclose(C, np.swapaxes(C, 1, 2), atol=1e-12):
            raise ValueError("C_t must be symmetric")
        if not np.allclose(C_term, C_term.T, atol=1e-12):
            raise ValueError("C_term must be symmetric")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "cc", cc)
        object.__setattr__(self, "C_term", C_term)
        object.__setattr__(self, "c_term", c_term)
        object.__setattr__(self, "cc_term", float(self.cc_term))

    @property
    def T(self) -> int:
        return self.C.shape[0]

    @property
    def n(self) -> int:
        return self.C_term.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[1] - self.C_term.shape[0]

    def evaluate(self, t: int, s: np.ndarray, a: np.ndarray) -> float:
        """Running cost 0.5 [s;a]^T C_t [s;a] + [s;a]^T c_t + cc_t."""
        z = np.concatenate([s, a])
        return float(0.5 * z @ self.C[t] @ z + z @ self.c[t] + self.cc[t])

    def evaluate_terminal(self, s: np.ndarray) -> float:
        return float(0.5 * s @ self.C_term @ s + s @ self.c_term + self.cc_term)

    @classmethod
    def zero(cls, n: int, m: int, T: int) -> "QuadraticCost":
        return cls(
            C=np.zeros((T, n + m, n + m)),
            c=np.zeros((T, n + m)),
            cc=np.zeros(T),
            C_term=np.zeros((n, n)),
            c_term=np.zeros(n),
            cc_term=0.0,
        )


def transitions(traj_or_demo) -> list:
    """Extract the T consecutive state pairs of a trajectory or demonstration.

    Returns [(s_t, s_{t+1}, t)] in time order, one tuple per step.
    """
    states = traj_or_demo.states
    return [(states[t], states[t + 1], t) for t in range(states.shape[0] - 1)]


def normalized_score(raw_return: float, random_return: float, expert_return: float) -> float:
    """Affine rescaling of a return: random policy maps to 0.0, expert to 1.0."""
    span = expert_return - random_return
    if abs(span) < 1e-12:
        raise ValueError(
            "expert and random reference returns coincide; score is undefined"
        )
    return (raw_return - random_return) / span
