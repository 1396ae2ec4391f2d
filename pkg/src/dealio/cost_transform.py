"""Turn the discriminator's transition-space quadratic into a state-action
quadratic through the fitted linear model, and time-index it at mean states.

The substitution s' = F [s; a] + f is exact, so the state-action quadratic
(including the carried constant) agrees with the transition quadratic at the
model-predicted next state for every (s, a); that identity is the module's
contract and is fuzz-verified.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discriminator import Discriminator, QuadHeadOutput, head_output
from .types import LinearGaussianDynamics, QuadraticCost

__all__ = [
    "StateActionQuadratic",
    "to_state_action",
    "mean_states",
    "extract_cost",
    "regularize_action_block",
]


@dataclass(frozen=True)
class StateActionQuadratic:
    C_sa: np.ndarray
    c_sa: np.ndarray
    cc_sa: float


def to_state_action(head: QuadHeadOutput, F_t: np.ndarray, f_t: np.ndarray) -> StateActionQuadratic:
    """Substitute the model's one-step prediction into the transition quadratic.

    F_t is n x (n+m) with the state partition in the first n columns; the
    constant produced by the substitution is carried so the identity with the
    transition quadratic is exact, not merely up to a per-step offset.
    """
    F_t = np.asarray(F_t, dtype=float)
    f_t = np.asarray(f_t, dtype=float)
    n = F_t.shape[0]
    m = F_t.shape[1] - n
    if m < 1 or head.C_ss.shape != (2 * n, 2 * n) or f_t.shape != (n,):
        raise ValueError("head/model dimensions disagree")
    Fs = F_t[:, :n]
    Fa = F_t[:, n:]
    C = head.C_ss
    Cs_s = C[:n, :n]
    Cs_sp = C[:n, n:]
    Csp_s = C[n:, :n]
    W = C[n:, n:]
    c_s = head.c_ss[:n]
    c_sp = head.c_ss[n:]

    C_ss_blk = Cs_s + Fs.T @ Csp_s + Cs_sp @ Fs + Fs.T @ W @ Fs
    C_sa_blk = Cs_sp @ Fa + Fs.T @ W @ Fa
    C_as_blk = Fa.T @ Csp_s + Fa.T @ W @ Fs
    C_aa_blk = Fa.T @ W @ Fa
    c_s_blk = (
        0.5 * Csp_s.T @ f_t
        + 0.5 * Cs_sp @ f_t
        + 0.5 * Fs.T @ W.T @ f_t
        + 0.5 * Fs.T @ W @ f_t
        + c_s
        + Fs.T @ c_sp
    )
    c_a_blk = 0.5 * Fa.T @ W.T @ f_t + 0.5 * Fa.T @ W @ f_t + Fa.T @ c_sp
    cc_sa = float(0.5 * f_t @ W @ f_t + c_sp @ f_t + head.cc_ss)

    C_sa = np.block([[C_ss_blk, C_sa_blk], [C_as_blk, C_aa_blk]])
    C_sa = 0.5 * (C_sa + C_sa.T)
    c_sa = np.concatenate([c_s_blk, c_a_blk])
    return StateActionQuadratic(C_sa=C_sa, c_sa=c_sa, cc_sa=cc_sa)


def mean_states(trajs) -> np.ndarray:
    """Per-step arithmetic mean of sampled states, shape (T+1, n)."""
    trajs = list(trajs)
    if not trajs:
        raise ValueError("need at least one trajectory")
    return np.mean([tr.states for tr in trajs], axis=0)


def regularize_action_block(C: np.ndarray, n: int, delta_reg: float) -> np.ndarray:
    """Lift the action-action block's minimum eigenvalue to at least delta_reg."""
    C = np.asarray(C, dtype=float)
    out = C.copy()
    lam = np.linalg.eigvalsh(0.5 * (C[n:, n:] + C[n:, n:].T)).min()
    bump = max(0.0, delta_reg - lam)
    if bump > 0:
        out[n:, n:] = out[n:, n:] + bump * np.eye(C.shape[0] - n)
    return out


def extract_cost(
    disc: Discriminator,
    dyn: LinearGaussianDynamics,
    trajs,
    delta_reg: float = 1e-4,
    average_transforms: bool = False,
) -> QuadraticCost:
    """Build the time-indexed quadratic cost the controller update consumes.

    Default behavior evaluates the head at the per-step mean transition;
    average_transforms instead averages the transformed quadratics over the
    sampled transitions (kept for ablation, the mean-evaluation variant
    performs better). The constant term is the head's constant, and the
    action block is regularized positive definite. Terminal term is zero:
    there is no transition pair to derive one from at the final state.
    """
    trajs = list(trajs)
    n, m, T = dyn.n, dyn.m, dyn.T
    if disc.n != n:
        raise ValueError("discriminator state dimension disagrees with the model")
    C = np.empty((T, n + m, n + m))
    c = np.empty((T, n + m))
    cc = np.empty(T)
    if average_transforms:
        for t in range(T):
            acc_C = np.zeros((n + m, n + m))
            acc_c = np.zeros(n + m)
            acc_cc = 0.0
            for tr in trajs:
                head = head_output(disc, tr.states[t], tr.states[t + 1])
                sa = to_state_action(head, dyn.F[t], dyn.f[t])
                acc_C += sa.C_sa
                acc_c += sa.c_sa
                acc_cc += head.cc_ss
            count = len(trajs)
            C[t] = regularize_action_block(acc_C / count, n, delta_reg)
            c[t] = acc_c / count
            cc[t] = acc_cc / count
    else:
        means = mean_states(trajs)
        for t in range(T):
            head = head_output(disc, means[t], means[t + 1])
            sa = to_state_action(head, dyn.F[t], dyn.f[t])
            C[t] = regularize_action_block(sa.C_sa, n, delta_reg)
            c[t] = sa.c_sa
            cc[t] = head.cc_ss
    return QuadraticCost(
        C=C, c=c, cc=cc, C_term=np.zeros((n, n)), c_term=np.zeros(n), cc_term=0.0
    )
