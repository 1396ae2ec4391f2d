"""Per-timestep local linear-Gaussian dynamics fitting from sampled rollouts."""
from __future__ import annotations

import numpy as np

from .types import LinearGaussianDynamics

__all__ = ["fit_dynamics"]


def fit_dynamics(trajs, reg: float = 1e-6, cov_floor: float = 1e-6) -> LinearGaussianDynamics:
    """Fit s_{t+1} ~ N(F_t [s_t; a_t] + f_t, Sigma_t) independently per step.

    Each per-step regression is ridge-regularized least squares over the N
    samples at that step. When N is below n+m+2 the design is rank deficient,
    so samples from the neighboring steps (t-1, t+1) are pooled in to keep the
    fit identifiable. Sigma_t is the residual covariance plus cov_floor * I.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValueError("need at least one trajectory")
    if reg <= 0 or cov_floor <= 0:
        raise ValueError("reg and cov_floor must be positive")
    n, m, T = trajs[0].n, trajs[0].m, trajs[0].T
    for tr in trajs:
        if (tr.n, tr.m, tr.T) != (n, m, T):
            raise ValueError("all trajectories must share n, m, T")

    N = len(trajs)
    # inputs[t]: N x (n+m+1) design rows [s, a, 1]; targets[t]: N x n.
    states = np.stack([tr.states for tr in trajs])  # N x (T+1) x n
    actions = np.stack([tr.actions for tr in trajs])  # N x T x m
    if not (np.all(np.isfinite(states)) and np.all(np.isfinite(actions))):
        raise ValueError("trajectory data contains non-finite entries")

    dim = n + m + 1
    pool_window = 1 if N < n + m + 2 else 0

    F = np.empty((T, n, n + m))
    f = np.empty((T, n))
    Sigma = np.empty((T, n, n))
    eye = np.eye(dim)
    for t in range(T):
        lo = max(0, t - pool_window)
        hi = min(T - 1, t + pool_window)
        s_in = states[:, lo : hi + 1].reshape(-1, n)
        a_in = actions[:, lo : hi + 1].reshape(-1, m)
        s_out = states[:, lo + 1 : hi + 2].reshape(-1, n)
        X = np.hstack([s_in, a_in, np.ones((s_in.shape[0], 1))])
        beta = np.linalg.solve(X.T @ X + reg * eye, X.T @ s_out)  # dim x n
        F[t] = beta[: n + m].T
        f[t] = beta[n + m]
        resid = s_out - X @ beta
        Sigma_t = (resid.T @ resid) / resid.shape[0] + cov_floor * np.eye(n)
        Sigma[t] = 0.5 * (Sigma_t + Sigma_t.T)
    return LinearGaussianDynamics(F=F, f=f, Sigma=Sigma)
