"""Deterministic RNG derivation. Every random stream in the package is keyed
off integer tuples so identical configs reproduce bit-identical runs."""
from __future__ import annotations

import numpy as np

# Stream tags; keep values stable, they are part of the reproducibility contract.
TAG_RESET = 0
TAG_ACTIONS = 1
TAG_DISC = 2
TAG_EVAL = 3
TAG_COLLECT = 4
TAG_EXPERT = 5


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single integer seed."""
    ss = np.random.SeedSequence([int(k) for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])
