"""Simulated users answering pairwise path queries.

Three answer models: deterministic (always the truly better path), flat
noise (correct with fixed probability p), and softmax (error rate grows
as the two paths get similar under the hidden weights).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ContractError, Environment, ObjectiveMode, Path, as_weight, cost

__all__ = ["SimulatedUser", "answer", "correct_prob", "sample_user_weight"]

MODELS = ("deterministic", "flat", "softmax")


@dataclass
class SimulatedUser:
    """A hidden ground-truth weight plus an answer model and rng stream."""

    w_user: np.ndarray
    mode: ObjectiveMode
    model: str = "softmax"
    p: float = 0.85
    seed: int | None = None
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.w_user = as_weight(self.w_user)
        if self.model not in MODELS:
            raise ContractError(f"unknown user model {self.model!r}")
        if self.model == "flat" and not 0.5 < self.p <= 1.0:
            raise ContractError(f"flat-noise p must be in (1/2, 1], got {self.p}")
        self.rng = np.random.default_rng(self.seed)

    def utility(self, path: Path) -> float:
        """Reward-mode utility; cost mode negates so higher is better."""
        c = cost(path, self.w_user)
        return c if self.mode is ObjectiveMode.REWARD else -c


def _softmax_first(user: SimulatedUser, p_path: Path, q_path: Path) -> float:
    """P(user picks the first path) under the softmax answer model."""
    gap = user.utility(p_path) - user.utility(q_path)
    if gap >= 0:
        return 1.0 / (1.0 + math.exp(-gap))
    e = math.exp(gap)
    return e / (1.0 + e)


def answer(user: SimulatedUser, p_path: Path, q_path: Path) -> Path:
    """The user's (possibly noisy) choice between two paths."""
    better_first = user.utility(p_path) >= user.utility(q_path)
    if user.model == "deterministic":
        return p_path if better_first else q_path
    if user.model == "flat":
        correct = user.rng.random() < user.p
        pick_first = better_first if correct else not better_first
        return p_path if pick_first else q_path
    return p_path if user.rng.random() < _softmax_first(user, p_path, q_path) else q_path


def correct_prob(user: SimulatedUser, p_path: Path, q_path: Path) -> float:
    """Probability that answer() picks the path truly better under w_user."""
    if user.model == "deterministic":
        return 1.0
    if user.model == "flat":
        return user.p
    first = _softmax_first(user, p_path, q_path)
    return max(first, 1.0 - first)


def sample_user_weight(
    env: Environment, rng: np.random.Generator, max_attempts: int = 100_000
) -> np.ndarray:
    """Unit-norm hidden user weight consistent with the environment bounds.

    Reward environments whose weight box contains the unit sphere draw
    uniformly from the sphere. Cost-mode boxes exclude parts of the
    sphere (the positive-cost guard), so there the direction is drawn
    uniformly from the box and normalized, which keeps the hidden weight
    inside the admissible cone.
    """
    d = env.feature_dim
    for _ in range(max_attempts):
        if env.mode is ObjectiveMode.COST:
            z = env.bounds.sample(rng, 1)[0]
        else:
            z = rng.normal(size=d)
        norm = np.linalg.norm(z)
        if norm < 1e-12:
            continue
        w = z / norm
        if env.supports_weight(w):
            return w
    raise ContractError("could not sample a plannable unit-norm user weight")
