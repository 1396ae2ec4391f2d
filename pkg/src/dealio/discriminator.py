"""Adversarial transition discriminator with a quadratic head.

A network maps a state transition (s, s') to the coefficients of a quadratic
form; the discriminator's value is that quadratic evaluated at the raw
transition. Training classifies imitator transitions (high) against
demonstrator transitions (low), so treating the value as a cost and
minimizing it drives the imitator toward demonstrator-like transitions.

The network consumes standardized inputs; the quadratic itself is in raw
state space so its coefficients can be consumed downstream as cost matrices.
The bottom-right (s', s') block is assembled as a Gram product, which keeps
the action-curvature it induces downstream positive semidefinite.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import net as nets
from .serialize import format_float
from .types import transitions

__all__ = [
    "RunningStats",
    "QuadHeadOutput",
    "Discriminator",
    "transition_matrix",
    "head_output",
    "d_value",
    "d_values",
    "transition_cost",
    "disc_loss",
    "disc_loss_and_grads",
    "train_disc",
    "save_discriminator",
    "load_discriminator",
]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softplus(x):
    return np.logaddexp(0.0, x)


@dataclass
class RunningStats:
    """Streaming per-dimension mean/variance accumulator."""

    count: float
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def zeros(cls, dim: int) -> "RunningStats":
        return cls(count=0.0, mean=np.zeros(dim), m2=np.zeros(dim))

    def update(self, batch: np.ndarray) -> None:
        batch = np.atleast_2d(np.asarray(batch, dtype=float))
        b_count = batch.shape[0]
        if b_count == 0:
            return
        b_mean = batch.mean(axis=0)
        b_m2 = ((batch - b_mean) ** 2).sum(axis=0)
        if self.count == 0:
            self.count, self.mean, self.m2 = float(b_count), b_mean, b_m2
            return
        delta = b_mean - self.mean
        total = self.count + b_count
        self.mean = self.mean + delta * (b_count / total)
        self.m2 = self.m2 + b_m2 + delta**2 * (self.count * b_count / total)
        self.count = total

    def std(self) -> np.ndarray:
        if self.count == 0:
            return np.ones_like(self.mean)
        return np.sqrt(self.m2 / self.count + 1e-8)

    def standardize(self, Z: np.ndarray) -> np.ndarray:
        if self.count == 0:
            return np.asarray(Z, dtype=float)
        return (np.asarray(Z, dtype=float) - self.mean) / self.std()


@dataclass(frozen=True)
class QuadHeadOutput:
    """Transition-space quadratic coefficients: exactly symmetric C_ss with a
    positive-semidefinite (s', s') block, plus linear and constant terms."""

    C_ss: np.ndarray
    c_ss: np.ndarray
    cc_ss: float


class _HeadIndex:
    """Packing layout between the flat network output and head coefficients."""

    def __init__(self, n: int):
        self.n = n
        self.p_sym = n * (n + 1) // 2
        self.p_cross = n * n
        self.p_tril = n * (n + 1) // 2
        self.tril = np.tril_indices(n)
        self.off_cross = self.p_sym
        self.off_tril = self.p_sym + self.p_cross
        self.off_lin = self.off_tril + self.p_tril
        self.out_dim = self.off_lin + 2 * n + 1


@dataclass
class Discriminator:
    net: nets.Mlp
    n: int
    stats: RunningStats
    opt: nets.OptState

    def __post_init__(self):
        expected = nets.quad_head_dim(self.n)
        if self.net.layer_sizes[-1] != expected or self.net.layer_sizes[0] != 2 * self.n:
            raise ValueError(
                f"network must map 2n={2 * self.n} inputs to {expected} outputs"
            )
        self._index = _HeadIndex(self.n)

    @classmethod
    def create(
        cls,
        n: int,
        rng: np.random.Generator,
        hidden: int = 100,
        lr: float = 1e-3,
    ) -> "Discriminator":
        sizes = [2 * n, hidden, hidden, nets.quad_head_dim(n)]
        mlp = nets.Mlp.create(sizes, rng)
        return cls(
            net=mlp,
            n=n,
            stats=RunningStats.zeros(2 * n),
            opt=nets.OptState.init(mlp.params(), lr=lr),
        )


def transition_matrix(items) -> np.ndarray:
    """Stack all (s_t, s_{t+1}) pairs of trajectories/demonstrations into rows."""
    rows = []
    for item in items:
        for s, s_next, _t in transitions(item):
            rows.append(np.concatenate([s, s_next]))
    if not rows:
        raise ValueError("no transitions available")
    return np.stack(rows)


def _unpack_head(disc: Discriminator, y: np.ndarray) -> QuadHeadOutput:
    n = disc.n
    idx = disc._index
    S = np.zeros((n, n))
    S[idx.tril] = y[: idx.p_sym]
    S = S + S.T - np.diag(np.diag(S))
    M = y[idx.off_cross : idx.off_tril].reshape(n, n)
    L = np.zeros((n, n))
    L[idx.tril] = y[idx.off_tril : idx.off_lin]
    W = L @ L.T
    C = np.block([[S, M], [M.T, W]])
    c = y[idx.off_lin : idx.off_lin + 2 * n]
    cc = float(y[-1])
    return QuadHeadOutput(C_ss=C, c_ss=c, cc_ss=cc)


def _batched_values(disc: Discriminator, Z: np.ndarray, want_grads: bool):
    """Quadratic values (and optionally d(value)/d(net output)) for rows of Z.

    The value deliberately excludes the constant head output, which would let
    the classifier cheat without shaping the quadratic.
    """
    n = disc.n
    idx = disc._index
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    B = Z.shape[0]
    X = disc.stats.standardize(Z)
    Y = nets.forward(disc.net, X)

    s, sp = Z[:, :n], Z[:, n:]
    ti, tj = idx.tril

    # Symmetric block: shared parameter for (i, j) and (j, i).
    sym_coeff = s[:, ti] * s[:, tj]
    sym_coeff[:, ti == tj] *= 0.5
    # Cross block: plain bilinear term.
    cross_coeff = (s[:, :, None] * sp[:, None, :]).reshape(B, n * n)
    # Gram block: 0.5 * || L^T s' ||^2 with L from the tril slice.
    Ltri = np.zeros((B, n, n))
    Ltri[:, ti, tj] = Y[:, idx.off_tril : idx.off_lin]
    u = np.einsum("bi,bij->bj", sp, Ltri)

    d = (
        (Y[:, : idx.p_sym] * sym_coeff).sum(axis=1)
        + (Y[:, idx.off_cross : idx.off_tril] * cross_coeff).sum(axis=1)
        + 0.5 * (u**2).sum(axis=1)
        + (Y[:, idx.off_lin : idx.off_lin + 2 * n] * Z).sum(axis=1)
    )
    if not want_grads:
        return d, X, Y, None
    dd_dy = np.zeros_like(Y)
    dd_dy[:, : idx.p_sym] = sym_coeff
    dd_dy[:, idx.off_cross : idx.off_tril] = cross_coeff
    dd_dy[:, idx.off_tril : idx.off_lin] = (sp[:, :, None] * u[:, None, :])[:, ti, tj]
    dd_dy[:, idx.off_lin : idx.off_lin + 2 * n] = Z
    return d, X, Y, dd_dy


def head_output(disc: Discriminator, s: np.ndarray, s_next: np.ndarray) -> QuadHeadOutput:
    z = np.concatenate([np.asarray(s, dtype=float), np.asarray(s_next, dtype=float)])
    if z.shape != (2 * disc.n,):
        raise ValueError("transition has wrong dimension")
    x = disc.stats.standardize(z[None, :])
    y = nets.forward(disc.net, x)[0]
    return _unpack_head(disc, y)


def d_value(disc: Discriminator, s: np.ndarray, s_next: np.ndarray) -> float:
    z = np.concatenate([np.asarray(s, dtype=float), np.asarray(s_next, dtype=float)])
    d, _, _, _ = _batched_values(disc, z[None, :], want_grads=False)
    return float(d[0])


def d_values(disc: Discriminator, Z: np.ndarray) -> np.ndarray:
    """Quadratic discriminator values for stacked transition rows."""
    d, _, _, _ = _batched_values(disc, Z, want_grads=False)
    return d


def transition_cost(disc: Discriminator, s: np.ndarray, s_next: np.ndarray) -> float:
    """Raw quadratic value plus the constant term; the per-transition cost the
    controller update consumes."""
    head = head_output(disc, s, s_next)
    z = np.concatenate([np.asarray(s, dtype=float), np.asarray(s_next, dtype=float)])
    return float(0.5 * z @ head.C_ss @ z + z @ head.c_ss + head.cc_ss)


def _as_rows(pairs) -> np.ndarray:
    if isinstance(pairs, np.ndarray):
        return np.atleast_2d(pairs)
    rows = []
    for item in pairs:
        if isinstance(item, np.ndarray) and item.ndim == 1:
            rows.append(item)
        else:
            s, s_next = item[0], item[1]
            rows.append(np.concatenate([s, s_next]))
    if not rows:
        raise ValueError("empty transition set")
    return np.stack(rows)


def disc_loss(disc: Discriminator, imitator_transitions, expert_transitions) -> float:
    """Binary logistic loss: imitator transitions labeled 1, expert labeled 0."""
    Zi = _as_rows(imitator_transitions)
    Ze = _as_rows(expert_transitions)
    di, _, _, _ = _batched_values(disc, Zi, want_grads=False)
    de, _, _, _ = _batched_values(disc, Ze, want_grads=False)
    return float(np.mean(_softplus(-di)) + np.mean(_softplus(de)))


def disc_loss_and_grads(disc: Discriminator, imitator_transitions, expert_transitions):
    """Loss plus exact gradients with respect to every network parameter."""
    Zi = _as_rows(imitator_transitions)
    Ze = _as_rows(expert_transitions)
    di, Xi, _, ddy_i = _batched_values(disc, Zi, want_grads=True)
    de, Xe, _, ddy_e = _batched_values(disc, Ze, want_grads=True)
    loss = float(np.mean(_softplus(-di)) + np.mean(_softplus(de)))

    gi = -(1.0 - _sigmoid(di)) / di.shape[0]
    ge = _sigmoid(de) / de.shape[0]
    grads_i, _ = nets.backward(disc.net, Xi, gi[:, None] * ddy_i)
    grads_e, _ = nets.backward(disc.net, Xe, ge[:, None] * ddy_e)
    grads = [a + b for a, b in zip(grads_i, grads_e)]
    return loss, grads


def train_disc(
    disc: Discriminator,
    imitator_trajs,
    demos,
    num_batches: int,
    rng: np.random.Generator,
):
    """Update the discriminator on one iteration's pooled transition data.

    The imitator pool is shuffled and split into num_batches shards; each
    optimizer step pairs one shard with an expert mini-batch of equal size
    drawn with replacement from the demonstration pool. Standardization
    statistics absorb the new data before any gradient step. Returns the
    updated discriminator and the mean per-batch loss.
    """
    if num_batches < 1:
        raise ValueError("num_batches must be >= 1")
    demo_list = demos.demos if hasattr(demos, "demos") else list(demos)
    Zi = transition_matrix(imitator_trajs)
    Ze_pool = transition_matrix(demo_list)
    disc.stats.update(Zi)
    disc.stats.update(Ze_pool)

    if Zi.shape[0] < num_batches:
        warnings.warn(
            f"only {Zi.shape[0]} imitator transitions for {num_batches} batches; "
            "training on a single batch"
        )
        num_batches = 1
    order = rng.permutation(Zi.shape[0])
    shards = np.array_split(Zi[order], num_batches)

    losses = []
    for shard in shards:
        pick = rng.integers(0, Ze_pool.shape[0], size=shard.shape[0])
        loss, grads = disc_loss_and_grads(disc, shard, Ze_pool[pick])
        params, disc.opt = nets.opt_step(disc.net.params(), grads, disc.opt)
        disc.net.set_params(params)
        losses.append(loss)
    return disc, float(np.mean(losses))


def save_discriminator(path, disc: Discriminator) -> None:
    with open(path, "w") as fh:
        fh.write(f"kind=discriminator n={disc.n}\n")
        fh.write(f"count {format_float(disc.stats.count)}\n")
        fh.write(" ".join(format_float(v) for v in disc.stats.mean) + "\n")
        fh.write(" ".join(format_float(v) for v in disc.stats.m2) + "\n")
        nets.write_mlp(fh, disc.net)


def load_discriminator(path) -> Discriminator:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    header = next(lines)
    if not header.startswith("kind=discriminator n="):
        raise ValueError("not a discriminator checkpoint")
    n = int(header.split("n=")[1])
    count_line = next(lines).split()
    if count_line[0] != "count":
        raise ValueError("malformed discriminator checkpoint")
    count = float(count_line[1])
    mean = np.array([float(v) for v in next(lines).split()])
    m2 = np.array([float(v) for v in next(lines).split()])
    mlp = nets.read_mlp(lines)
    stats = RunningStats(count=count, mean=mean, m2=m2)
    return Discriminator(net=mlp, n=n, stats=stats, opt=nets.OptState.init(mlp.params()))
