"""Path-integral policy improvement on per-trajectory residual costs.

Trajectories are weighted per step by the softmax of negative residual
cost-to-go; the controller is refit by weighted ridge regression of sampled
actions onto states. The regression is parameterized as a deviation from the
reference controller, so the ridge shrinks toward that controller (not toward
zero gains) and data already consistent with it is an exact fixed point.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .types import TvlgController

__all__ = ["Pi2Config", "cost_to_go", "pi2_weights", "pi2_update"]


@dataclass(frozen=True)
class Pi2Config:
    temperature: float = 1.0
    normalize_costs: bool = True
    cov_update: bool = False
    ridge: float = 1e-6
    cov_floor: float = 1e-6

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.ridge <= 0 or self.cov_floor <= 0:
            raise ValueError("ridge and cov_floor must be positive")


def cost_to_go(residual: np.ndarray) -> np.ndarray:
    """Suffix sums along time: out[i, t] = sum of residual[i, t:]."""
    residual = np.asarray(residual, dtype=float)
    if not np.all(np.isfinite(residual)):
        raise ValueError("residual contains non-finite entries")
    return np.cumsum(residual[:, ::-1], axis=1)[:, ::-1]


def pi2_weights(residual: np.ndarray, cfg: Pi2Config) -> np.ndarray:
    """Per-step trajectory weights: softmax of negative (normalized) cost-to-go.

    Each column sums to one. Adding a constant to all trajectories at a step
    leaves that step's weights unchanged.
    """
    S = cost_to_go(residual)
    if cfg.normalize_costs:
        lo = S.min(axis=0, keepdims=True)
        hi = S.max(axis=0, keepdims=True)
        span = hi - lo
        span = np.where(span > 0, span, 1.0)
        S = (S - lo) / span
    logits = -S / cfg.temperature
    logits = logits - logits.max(axis=0, keepdims=True)
    w = np.exp(logits)
    totals = w.sum(axis=0)
    bad = ~np.isfinite(totals) | (totals <= 0)
    if np.any(bad):
        warnings.warn("degenerate path-integral weights; falling back to uniform")
        w[:, bad] = 1.0
        totals = w.sum(axis=0)
    return w / totals


def pi2_update(
    ctrl: TvlgController,
    trajs,
    residual: np.ndarray,
    cfg: Pi2Config,
    prior_weight: float = 0.0,
) -> TvlgController:
    """Reweight the sampled actions by residual cost-to-go and refit the controller.

    ctrl is the reference the regression shrinks toward. prior_weight > 0 adds
    one synthetic sample per state pinning the reference controller's mean
    action, each carrying weight prior_weight / N (the weight one trajectory
    gets under uniform softmax).
    """
    trajs = list(trajs)
    N = len(trajs)
    if N < 2:
        raise ValueError("path-integral update needs at least 2 trajectories")
    residual = np.asarray(residual, dtype=float)
    n, m, T = ctrl.n, ctrl.m, ctrl.T
    if residual.shape != (N, T):
        raise ValueError(f"residual must be {N}x{T}, got {residual.shape}")
    for tr in trajs:
        if (tr.n, tr.m, tr.T) != (n, m, T):
            raise ValueError("trajectory dimensions disagree with controller")

    w = pi2_weights(residual, cfg)
    states = np.stack([tr.states for tr in trajs])  # N x (T+1) x n
    actions = np.stack([tr.actions for tr in trajs])  # N x T x m

    K_new = np.empty_like(ctrl.K)
    k_new = np.empty_like(ctrl.k)
    cov_new = np.empty_like(ctrl.cov)
    eye = np.eye(n + 1)
    for t in range(T):
        X = np.hstack([states[:, t], np.ones((N, 1))])  # N x (n+1)
        dev = actions[:, t] - (states[:, t] @ ctrl.K[t].T + ctrl.k[t])  # N x m
        wt = w[:, t]
        A = (X * wt[:, None]).T @ X
        b = (X * wt[:, None]).T @ dev
        if prior_weight > 0:
            # Prior rows target zero deviation (the reference controller).
            A += (prior_weight / N) * (X.T @ X)
        beta = np.linalg.solve(A + cfg.ridge * eye, b)  # (n+1) x m
        K_new[t] = ctrl.K[t] + beta[:n].T
        k_new[t] = ctrl.k[t] + beta[n]
        if cfg.cov_update:
            r = actions[:, t] - (states[:, t] @ K_new[t].T + k_new[t])
            S = (r * wt[:, None]).T @ r
            S = 0.5 * (S + S.T)
            vals, vecs = np.linalg.eigh(S)
            vals = np.maximum(vals, cfg.cov_floor)
            cov_new[t] = (vecs * vals) @ vecs.T
        else:
            cov_new[t] = ctrl.cov[t]
    return TvlgController(K=K_new, k=k_new, cov=cov_new)
