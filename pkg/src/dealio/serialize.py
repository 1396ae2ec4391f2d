"""Plain-text file formats for rollouts, controllers, models, and costs.

All floats are written with 17 significant digits so 64-bit values round-trip
exactly. Matrices are stored row-major in full; symmetric matrices are
re-symmetrized on load to absorb round-off from external editors.
"""
from __future__ import annotations

import numpy as np

from .types import (
    Demonstration,
    DemonstrationSet,
    LinearGaussianDynamics,
    QuadraticCost,
    Trajectory,
    TvlgController,
)

__all__ = [
    "format_float",
    "save_trajectories",
    "load_trajectories",
    "save_demonstrations",
    "load_demonstrations",
    "save_controller",
    "load_controller",
    "save_dynamics",
    "load_dynamics",
    "save_cost",
    "load_cost",
]


def format_float(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(fh, arr):
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    for row in arr:
        fh.write(" ".join(format_float(v) for v in row))
        fh.write("\n")


def _read_rows(lines, count, width, what):
    out = np.empty((count, width))
    for i in range(count):
        parts = next(lines, None)
        if parts is None:
            raise ValueError(f"unexpected end of file while reading {what}")
        vals = parts.split()
        if len(vals) != width:
            raise ValueError(f"expected {width} values per {what} row, got {len(vals)}")
        out[i] = [float(v) for v in vals]
    return out


def _parse_header(line, keys):
    fields = dict(part.split("=", 1) for part in line.split())
    if set(fields) != set(keys):
        raise ValueError(f"bad header: expected keys {keys}, got {sorted(fields)}")
    return [int(fields[k]) for k in keys]


def _symmetrize(mat):
    return 0.5 * (mat + np.swapaxes(mat, -1, -2))


def save_trajectories(path, trajs) -> None:
    trajs = list(trajs)
    if not trajs:
        raise ValueError("no trajectories to save")
    n, m, T = trajs[0].n, trajs[0].m, trajs[0].T
    with open(path, "w") as fh:
        fh.write(f"n={n} m={m} T={T} count={len(trajs)}\n")
        for tr in trajs:
            if (tr.n, tr.m, tr.T) != (n, m, T):
                raise ValueError("trajectories in one file must share n, m, T")
            _write_rows(fh, tr.states)
            _write_rows(fh, tr.actions)


def load_trajectories(path) -> list:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    n, m, T, count = _parse_header(next(lines), ["n", "m", "T", "count"])
    if m == 0:
        raise ValueError("file holds demonstrations (m=0); use load_demonstrations")
    out = []
    for _ in range(count):
        states = _read_rows(lines, T + 1, n, "state")
        actions = _read_rows(lines, T, m, "action")
        out.append(Trajectory(states=states, actions=actions))
    return out


def save_demonstrations(path, demo_set: DemonstrationSet) -> None:
    with open(path, "w") as fh:
        fh.write(f"n={demo_set.n} m=0 T={demo_set.T} count={len(demo_set)}\n")
        for demo in demo_set.demos:
            _write_rows(fh, demo.states)


def load_demonstrations(path) -> DemonstrationSet:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    n, m, T, count = _parse_header(next(lines), ["n", "m", "T", "count"])
    if m != 0:
        raise ValueError("file holds full trajectories (m>0); use load_trajectories")
    demos = [Demonstration(states=_read_rows(lines, T + 1, n, "state")) for _ in range(count)]
    return DemonstrationSet(demos=tuple(demos), n=n, T=T)


def save_controller(path, ctrl: TvlgController) -> None:
    T, m, n = ctrl.T, ctrl.m, ctrl.n
    with open(path, "w") as fh:
        fh.write(f"kind=tvlg n={n} m={m} T={T}\n")
        for t in range(T):
            _write_rows(fh, ctrl.K[t])
            _write_rows(fh, ctrl.k[t])
            _write_rows(fh, ctrl.cov[t])


def load_controller(path) -> TvlgController:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    header = next(lines)
    if not header.startswith("kind=tvlg "):
        raise ValueError("not a controller file")
    n, m, T = _parse_header(header[len("kind=tvlg "):], ["n", "m", "T"])
    K = np.empty((T, m, n))
    k = np.empty((T, m))
    cov = np.empty((T, m, m))
    for t in range(T):
        K[t] = _read_rows(lines, m, n, "K")
        k[t] = _read_rows(lines, 1, m, "k")[0]
        cov[t] = _symmetrize(_read_rows(lines, m, m, "cov"))
    return TvlgController(K=K, k=k, cov=cov)


def save_dynamics(path, dyn: LinearGaussianDynamics) -> None:
    T, n, m = dyn.T, dyn.n, dyn.m
    with open(path, "w") as fh:
        fh.write(f"kind=lingauss n={n} m={m} T={T}\n")
        for t in range(T):
            _write_rows(fh, dyn.F[t])
            _write_rows(fh, dyn.f[t])
            _write_rows(fh, dyn.Sigma[t])


def load_dynamics(path) -> LinearGaussianDynamics:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    header = next(lines)
    if not header.startswith("kind=lingauss "):
        raise ValueError("not a dynamics file")
    n, m, T = _parse_header(header[len("kind=lingauss "):], ["n", "m", "T"])
    F = np.empty((T, n, n + m))
    f = np.empty((T, n))
    Sigma = np.empty((T, n, n))
    for t in range(T):
        F[t] = _read_rows(lines, n, n + m, "F")
        f[t] = _read_rows(lines, 1, n, "f")[0]
        Sigma[t] = _symmetrize(_read_rows(lines, n, n, "Sigma"))
    return LinearGaussianDynamics(F=F, f=f, Sigma=Sigma)


def save_cost(path, cost: QuadraticCost) -> None:
    T, n, m = cost.T, cost.n, cost.m
    with open(path, "w") as fh:
        fh.write(f"kind=quadcost n={n} m={m} T={T}\n")
        for t in range(T):
            _write_rows(fh, cost.C[t])
            _write_rows(fh, cost.c[t])
            _write_rows(fh, [[cost.cc[t]]])
        _write_rows(fh, cost.C_term)
        _write_rows(fh, cost.c_term)
        _write_rows(fh, [[cost.cc_term]])


def load_cost(path) -> QuadraticCost:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    header = next(lines)
    if not header.startswith("kind=quadcost "):
        raise ValueError("not a cost file")
    n, m, T = _parse_header(header[len("kind=quadcost "):], ["n", "m", "T"])
    nm = n + m
    C = np.empty((T, nm, nm))
    c = np.empty((T, nm))
    cc = np.empty(T)
    for t in range(T):
        C[t] = _symmetrize(_read_rows(lines, nm, nm, "C"))
        c[t] = _read_rows(lines, 1, nm, "c")[0]
        cc[t] = _read_rows(lines, 1, 1, "cc")[0, 0]
    C_term = _symmetrize(_read_rows(lines, n, n, "C_term"))
    c_term = _read_rows(lines, 1, n, "c_term")[0]
    cc_term = _read_rows(lines, 1, 1, "cc_term")[0, 0]
    return QuadraticCost(C=C, c=c, cc=cc, C_term=C_term, c_term=c_term, cc_term=cc_term)
