"""Two-stage controller update: LQR on a quadratic cost, then a path-integral
correction on the residual between the true step cost and that quadratic."""
from __future__ import annotations

import numpy as np

from .lqr import LqrConfig, backward_recursion
from .pi2 import Pi2Config, pi2_update
from .types import QuadraticCost, TvlgController

__all__ = ["eval_quadratic", "compute_residual", "pilqr_update"]


def eval_quadratic(cost: QuadraticCost, t: int, s: np.ndarray, a: np.ndarray) -> float:
    """Running quadratic cost 0.5 [s;a]^T C_t [s;a] + [s;a]^T c_t + cc_t."""
    if t >= cost.T:
        raise ValueError(f"step {t} out of range for horizon {cost.T}")
    return cost.evaluate(t, np.asarray(s, dtype=float), np.asarray(a, dtype=float))


def compute_residual(trajs, quad_cost: QuadraticCost, true_step_cost) -> np.ndarray:
    """N x T matrix of true step cost minus its quadratic surrogate."""
    trajs = list(trajs)
    T = quad_cost.T
    out = np.empty((len(trajs), T))
    for i, tr in enumerate(trajs):
        for t in range(T):
            s, s_next, a = tr.states[t], tr.states[t + 1], tr.actions[t]
            out[i, t] = true_step_cost(t, s, s_next, a) - quad_cost.evaluate(t, s, a)
    return out


def pilqr_update(
    ctrl: TvlgController,
    trajs,
    dyn,
    quad_cost: QuadraticCost,
    true_step_cost,
    lqr_cfg: LqrConfig,
    pi2_cfg: Pi2Config,
    prior_weight: float = 1.0,
) -> TvlgController:
    """Model-based pass on the quadratic cost, then a sample-based correction.

    Stage 1 solves the LQG problem for quad_cost under the fitted model.
    Stage 2 weights the sampled trajectories by the residual cost the
    quadratic failed to capture and regresses the controller around the
    stage-1 solution; prior_weight pins that solution so the correction
    perturbs rather than replaces it. With zero residual and samples already
    consistent with stage 1, the output is exactly the stage-1 controller.
    """
    if (ctrl.n, ctrl.m, ctrl.T) != (dyn.n, dyn.m, dyn.T):
        raise ValueError("sampling controller dimensions disagree with the model")
    ctrl_model = backward_recursion(dyn, quad_cost, lqr_cfg)
    residual = compute_residual(trajs, quad_cost, true_step_cost)
    return pi2_update(ctrl_model, trajs, residual, pi2_cfg, prior_weight=prior_weight)
