"""Minimal feed-forward network with exact reverse-mode gradients and Adam.

Fixed topology: tanh hidden layers, identity output. Single vectors and
batches (rows) are both accepted. This is all the network machinery the
discriminator needs; there is deliberately no general autodiff here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .serialize import format_float

__all__ = [
    "Mlp",
    "OptState",
    "quad_head_dim",
    "forward",
    "backward",
    "opt_step",
    "save_mlp",
    "load_mlp",
]


def quad_head_dim(n: int) -> int:
    """Output width needed to emit a symmetric 2n x 2n matrix, a 2n vector,
    and one constant."""
    two_n = 2 * n
    return two_n * (two_n + 1) // 2 + two_n + 1


@dataclass
class Mlp:
    """Weights are (fan_in, fan_out); forward maps x -> x @ W + b per layer."""

    weights: list
    biases: list

    @property
    def layer_sizes(self) -> list:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    def params(self) -> list:
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend([W, b])
        return out

    def set_params(self, params) -> None:
        n_layers = len(self.weights)
        if len(params) != 2 * n_layers:
            raise ValueError("parameter list length mismatch")
        self.weights = [params[2 * i] for i in range(n_layers)]
        self.biases = [params[2 * i + 1] for i in range(n_layers)]

    def num_params(self) -> int:
        return sum(p.size for p in self.params())

    @classmethod
    def create(cls, layer_sizes, rng: np.random.Generator, output_scale: float = 0.01) -> "Mlp":
        """Fan-in-scaled uniform weights, zero biases; the output layer is
        shrunk so the initial map is near zero."""
        weights, biases = [], []
        n_layers = len(layer_sizes) - 1
        for i in range(n_layers):
            fan_in, fan_out = layer_sizes[i], layer_sizes[i + 1]
            bound = 1.0 / np.sqrt(fan_in)
            W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            if i == n_layers - 1:
                W = W * output_scale
            weights.append(W)
            biases.append(np.zeros(fan_out))
        return cls(weights=weights, biases=biases)


def forward(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on a vector or a batch of row vectors."""
    h = np.asarray(x, dtype=float)
    last = len(mlp.weights) - 1
    for i, (W, b) in enumerate(zip(mlp.weights, mlp.biases)):
        h = h @ W + b
        if i < last:
            h = np.tanh(h)
    return h


def backward(mlp: Mlp, x: np.ndarray, grad_out: np.ndarray):
    """Exact gradients of sum(grad_out * forward(mlp, x)).

    Returns (param_grads, input_grad) with param_grads ordered like
    Mlp.params(). Batched inputs accumulate over the batch.
    """
    x = np.asarray(x, dtype=float)
    grad_out = np.asarray(grad_out, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    G = np.atleast_2d(grad_out)

    n_layers = len(mlp.weights)
    acts = [X]
    for i, (W, b) in enumerate(zip(mlp.weights, mlp.biases)):
        z = acts[-1] @ W + b
        acts.append(np.tanh(z) if i < n_layers - 1 else z)

    grads = [None] * (2 * n_layers)
    g = G
    for i in reversed(range(n_layers)):
        if i < n_layers - 1:
            g = g * (1.0 - acts[i + 1] ** 2)  # tanh'(z) via the cached activation
        grads[2 * i] = acts[i].T @ g
        grads[2 * i + 1] = g.sum(axis=0)
        g = g @ mlp.weights[i].T
    input_grad = g[0] if single else g
    return grads, input_grad


@dataclass(frozen=True)
class OptState:
    """Adam accumulators; immutable so optimizer steps are pure."""

    m: tuple
    v: tuple
    step: int
    lr: float
    beta1: float
    beta2: float
    eps: float

    @classmethod
    def init(
        cls,
        params,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ) -> "OptState":
        return cls(
            m=tuple(np.zeros_like(p) for p in params),
            v=tuple(np.zeros_like(p) for p in params),
            step=0,
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
        )


def opt_step(params, grads, state: OptState):
    """One bias-corrected adaptive-moment update; returns (params', state')."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and optimizer state shapes disagree")
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_p = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**step)
        v_hat = v / (1.0 - b2**step)
        new_p.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    new_state = OptState(
        m=tuple(new_m),
        v=tuple(new_v),
        step=step,
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    return new_p, new_state


def save_mlp(path, mlp: Mlp) -> None:
    with open(path, "w") as fh:
        write_mlp(fh, mlp)


def write_mlp(fh, mlp: Mlp) -> None:
    sizes = ",".join(str(s) for s in mlp.layer_sizes)
    fh.write(f"kind=mlp layers={sizes}\n")
    for W, b in zip(mlp.weights, mlp.biases):
        for row in W:
            fh.write(" ".join(format_float(v) for v in row) + "\n")
        fh.write(" ".join(format_float(v) for v in b) + "\n")


def load_mlp(path) -> Mlp:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    return read_mlp(lines)


def read_mlp(lines) -> Mlp:
    header = next(lines)
    if not header.startswith("kind=mlp layers="):
        raise ValueError("not a network checkpoint")
    sizes = [int(s) for s in header[len("kind=mlp layers="):].split(",")]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        W = np.empty((fan_in, fan_out))
        for r in range(fan_in):
            W[r] = [float(v) for v in next(lines).split()]
        b = np.array([float(v) for v in next(lines).split()])
        if b.shape != (fan_out,):
            raise ValueError("bias row width disagrees with header")
        weights.append(W)
        biases.append(b)
    return Mlp(weights=weights, biases=biases)
