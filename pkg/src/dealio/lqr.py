"""Finite-horizon LQG backward recursion for time-varying linear-Gaussian models.

The recursion consumes a fitted linear-Gaussian model and a time-indexed
quadratic cost and produces a time-varying linear-Gaussian controller. Gains
come from the standard Riccati-style dynamic programming pass; the controller
covariance is the maximum-entropy choice entropy_temp * Quu^-1, so sharper
action curvature means less exploration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import LinearGaussianDynamics, QuadraticCost, TvlgController

__all__ = ["LqrConfig", "ConditioningError", "backward_recursion", "expected_model_cost"]


@dataclass(frozen=True)
class LqrConfig:
    quu_reg_init: float = 1e-6
    quu_reg_growth: float = 10.0
    max_reg_steps: int = 8
    entropy_temp: float = 1.0

    def __post_init__(self):
        if self.quu_reg_init <= 0 or self.entropy_temp <= 0:
            raise ValueError("quu_reg_init and entropy_temp must be positive")
        if self.quu_reg_growth <= 1.0:
            raise ValueError("quu_reg_growth must exceed 1")
        if self.max_reg_steps < 1:
            raise ValueError("max_reg_steps must be >= 1")


class ConditioningError(RuntimeError):
    """Action-curvature block could not be made positive definite."""

    def __init__(self, t: int, detail: str = ""):
        msg = f"Q[aa] not positive definite at step {t} after regularization"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.t = t


def _chol_or_none(mat):
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        return None


def backward_recursion(
    dyn: LinearGaussianDynamics, cost: QuadraticCost, cfg: LqrConfig
) -> TvlgController:
    """Solve the finite-horizon LQG problem for the given model and cost.

    Regularization is lazy: Quu is used as-is when already positive definite,
    so well-conditioned problems are solved exactly; otherwise an additive
    delta * I is escalated geometrically before giving up.
    """
    n, m, T = dyn.n, dyn.m, dyn.T
    if (cost.n, cost.m, cost.T) != (n, m, T):
        raise ValueError("dynamics and cost dimensions disagree")

    K = np.empty((T, m, n))
    k = np.empty((T, m))
    cov = np.empty((T, m, m))

    V = cost.C_term.copy()
    v = cost.c_term.copy()
    for t in reversed(range(T)):
        F, fv = dyn.F[t], dyn.f[t]
        Q = cost.C[t] + F.T @ V @ F
        Q = 0.5 * (Q + Q.T)
        q = cost.c[t] + F.T @ (V @ fv + v)

        Quu = Q[n:, n:]
        chol = _chol_or_none(Quu)
        delta = cfg.quu_reg_init
        attempts = 0
        while chol is None:
            if attempts >= cfg.max_reg_steps:
                raise ConditioningError(t, f"last delta {delta / cfg.quu_reg_growth:g}")
            Quu = Q[n:, n:] + delta * np.eye(m)
            chol = _chol_or_none(Quu)
            delta *= cfg.quu_reg_growth
            attempts += 1

        K[t] = -np.linalg.solve(Quu, Q[n:, :n])
        k[t] = -np.linalg.solve(Quu, q[n:])
        cov_t = cfg.entropy_temp * np.linalg.solve(Quu, np.eye(m))
        cov[t] = 0.5 * (cov_t + cov_t.T)

        V = Q[:n, :n] + Q[:n, n:] @ K[t]
        V = 0.5 * (V + V.T)
        v = q[:n] + Q[:n, n:] @ k[t]

    return TvlgController(K=K, k=k, cov=cov)


def expected_model_cost(
    ctrl: TvlgController,
    dyn: LinearGaussianDynamics,
    cost: QuadraticCost,
    x0_mean: np.ndarray,
    x0_cov: np.ndarray,
) -> float:
    """Exact expected cumulative cost of the controller under the model.

    Propagates the Gaussian state distribution through the closed loop and
    takes closed-form expectations of each quadratic cost term; serves as an
    oracle for optimality checks.
    """
    n, m, T = dyn.n, dyn.m, dyn.T
    if (ctrl.n, ctrl.m, ctrl.T) != (n, m, T):
        raise ValueError("controller and model dimensions disagree")
    mu = np.asarray(x0_mean, dtype=float)
    S = np.asarray(x0_cov, dtype=float)
    if mu.shape != (n,) or S.shape != (n, n):
        raise ValueError("x0 moments have wrong shape")

    total = 0.0
    for t in range(T):
        Kt, kt = ctrl.K[t], ctrl.k[t]
        mu_a = Kt @ mu + kt
        cross = S @ Kt.T
        S_z = np.block([[S, cross], [cross.T, Kt @ S @ Kt.T + ctrl.cov[t]]])
        mu_z = np.concatenate([mu, mu_a])
        total += (
            0.5 * (mu_z @ cost.C[t] @ mu_z + np.trace(cost.C[t] @ S_z))
            + cost.c[t] @ mu_z
            + cost.cc[t]
        )
        F, fv = dyn.F[t], dyn.f[t]
        mu = F @ mu_z + fv
        S = F @ S_z @ F.T + dyn.Sigma[t]
        S = 0.5 * (S + S.T)
    total += (
        0.5 * (mu @ cost.C_term @ mu + np.trace(cost.C_term @ S))
        + cost.c_term @ mu
        + cost.cc_term
    )
    return float(total)
