"""Training orchestration: the adversarial imitation loop, a model-free
adversarial baseline on the same controller class, and expert/demo generation.

Every random stream is derived from (seed, stream tag, iteration), so a run is
a pure function of its configuration. Evaluation rollouts use a stream of
their own and are excluded from the transition count; the true cost touches
only evaluation and expert training, never the imitation signal.
"""
from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .cost_transform import extract_cost, mean_states
from .discriminator import (
    Discriminator,
    d_values,
    save_discriminator,
    train_disc,
    transition_cost,
    transition_matrix,
)
from .dynamics import fit_dynamics
from .envs import build_env, rollout, true_return
from .lqr import LqrConfig
from .pi2 import Pi2Config, cost_to_go
from .pilqr import pilqr_update
from .seeding import TAG_COLLECT, TAG_DISC, TAG_EVAL, TAG_EXPERT, derive_seed, make_rng
from .serialize import format_float, save_controller
from .types import (
    Demonstration,
    DemonstrationSet,
    EnvSpecLike := object,  # placeholder removed below
)

__all__ = [
    "DealioConfig",
    "CurveRow",
    "LearningCurve",
    "init_controller",
    "LoopState",
    "dealio_iteration",
    "baseline_iteration",
    "run_dealio",
    "run_baseline",
    "train_expert",
    "generate_demos",
    "compute_score_refs",
]
