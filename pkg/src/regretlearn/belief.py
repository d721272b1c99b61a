"""Sampled hypothesis set, feedback sequence and Bayesian posterior.

The hypothesis set is fixed at session start: each hypothesis is a
uniformly sampled weight with its precomputed optimal path and cost.
Posterior masses live in log space so long feedback sequences cannot
underflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import (
    REGRET_SHIFT_EPS,
    ContractError,
    Environment,
    ObjectiveMode,
    Path,
    PlannerError,
    WeightBounds,
    as_weight,
    cost,
)

__all__ = [
    "RenormalizationError",
    "Hypothesis",
    "FeedbackRecord",
    "FeedbackSequence",
    "BeliefState",
    "sample_omega",
    "likelihood",
    "update",
    "expected_weight",
    "map_weight",
    "estimate_weight",
    "feasible",
]


class RenormalizationError(RuntimeError):
    """A feedback record drove every hypothesis mass to zero."""


@dataclass(frozen=True, eq=False)
class Hypothesis:
    """A sampled weight with its precomputed optimal path and cost.

    `offset` is the reward-mode shift making all session path costs
    strictly positive under this weight; zero in cost mode.
    """

    weight: np.ndarray
    opt_path: Path
    opt_cost: float
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "weight", as_weight(self.weight))
        if abs(self.opt_cost - cost(self.opt_path, self.weight)) > 1e-9:
            raise ContractError("opt_cost does not match cost(opt_path, weight)")


@dataclass(frozen=True)
class FeedbackRecord:
    """One user choice: preferred path P, rejected path Q, delta = phi^P - phi^Q."""

    preferred: Path
    rejected: Path
    delta: np.ndarray

    def __post_init__(self):
        d = as_weight(self.delta, dim=self.preferred.features.shape[0])
        if not np.array_equal(d, self.preferred.features - self.rejected.features):
            raise ContractError("delta != preferred.features - rejected.features")
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_paths(cls, preferred: Path, rejected: Path) -> "FeedbackRecord":
        return cls(
            preferred=preferred,
            rejected=rejected,
            delta=preferred.features - rejected.features,
        )


@dataclass(frozen=True)
class FeedbackSequence:
    """Ordered user feedback; stacked deltas form the constraint matrix."""

    records: tuple = ()
    mode: ObjectiveMode = ObjectiveMode.COST

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def matrix(self) -> np.ndarray:
        """Row i is records[i].delta; shape (k, d), (0, 0) when empty."""
        if not self.records:
            return np.zeros((0, 0))
        return np.vstack([r.delta for r in self.records])

    def append(self, record: FeedbackRecord) -> "FeedbackSequence":
        return FeedbackSequence(records=self.records + (record,), mode=self.mode)


def _normalize(log_mass: np.ndarray) -> np.ndarray:
    top = np.max(log_mass)
    if not np.isfinite(top):
        raise RenormalizationError("all hypothesis masses are zero")
    return log_mass - (top + np.log(np.sum(np.exp(log_mass - top))))


@dataclass(frozen=True)
class BeliefState:
    """Normalized posterior over a fixed hypothesis set."""

    hypotheses: tuple
    log_mass: np.ndarray
    user_p: float
    feedback: FeedbackSequence
    mode: ObjectiveMode

    def __post_init__(self):
        if not 0.5 < self.user_p <= 1.0:
            raise ContractError(f"user model parameter p must be in (1/2, 1], got {self.user_p}")
        lm = np.asarray(self.log_mass, dtype=float)
        if lm.shape != (len(self.hypotheses),):
            raise ContractError("log_mass length does not match hypotheses")
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        object.__setattr__(self, "log_mass", _normalize(lm))

    @classmethod
    def uniform(
        cls, hypotheses: Sequence[Hypothesis], user_p: float, mode: ObjectiveMode
    ) -> "BeliefState":
        n = len(hypotheses)
        if n < 1:
            raise ContractError("belief needs at least one hypothesis")
        return cls(
            hypotheses=tuple(hypotheses),
            log_mass=np.zeros(n),
            user_p=user_p,
            feedback=FeedbackSequence(mode=mode),
            mode=mode,
        )

    @property
    def masses(self) -> np.ndarray:
        return np.exp(self.log_mass)

    @property
    def weight_matrix(self) -> np.ndarray:
        return np.array([h.weight for h in self.hypotheses])


def sample_omega(
    env: Environment, bounds: WeightBounds, n: int, seed
) -> tuple:
    """Sample n hypotheses i.i.d. uniform over the bounds box.

    Planner failures are skipped and resampled, up to 10n attempts. In
    reward mode every hypothesis gets an offset making all sampled
    optimal paths' costs strictly positive under its weight.
    """
    if n < 2:
        raise ContractError("need at least 2 hypotheses")
    rng = np.random.default_rng(seed)
    weights: list = []
    paths: list = []
    attempts = 0
    while len(weights) < n:
        if attempts >= 10 * n:
            raise PlannerError(
                f"planner failed too often: {len(weights)}/{n} after {attempts} attempts"
            )
        attempts += 1
        w = bounds.sample(rng, 1)[0]
        try:
            path = env.optimal_path(w)
        except PlannerError:
            continue
        weights.append(w)
        paths.append(path)

    offsets = np.zeros(n)
    if env.mode is ObjectiveMode.REWARD:
        feats = np.array([p.features for p in paths])
        costs = feats @ np.array(weights).T  # [path i, weight j]
        for j, w in enumerate(weights):
            offsets[j] = max(
                env.cost_offset(w), REGRET_SHIFT_EPS - float(np.min(costs[:, j])), 0.0
            )
    return tuple(
        Hypothesis(weight=w, opt_path=p, opt_cost=cost(p, w), offset=float(o))
        for w, p, o in zip(weights, paths, offsets)
    )


def likelihood(
    record: FeedbackRecord, w, p: float, mode: ObjectiveMode = ObjectiveMode.COST
) -> float:
    """P(user prefers `record.preferred` | w): p if consistent, else 1 - p."""
    if not 0.5 < p <= 1.0:
        raise ContractError(f"p must be in (1/2, 1], got {p}")
    c_pref = cost(record.preferred, w)
    c_rej = cost(record.rejected, w)
    return p if mode.prefers(c_pref, c_rej) else 1.0 - p


def update(belief: BeliefState, record: FeedbackRecord) -> BeliefState:
    """Multiply every mass by the record's likelihood and renormalize."""
    dvals = belief.weight_matrix @ record.delta
    if belief.mode is ObjectiveMode.COST:
        consistent = dvals <= 0.0
    else:
        consistent = dvals >= 0.0
    p = belief.user_p
    log_bad = -np.inf if p == 1.0 else np.log1p(-p)
    loglik = np.where(consistent, np.log(p), log_bad)
    new_mass = belief.log_mass + loglik
    if not np.any(np.isfinite(new_mass)):
        raise RenormalizationError(
            f"record annihilated the belief (no consistent hypothesis): {record!r}"
        )
    return replace(
        belief, log_mass=new_mass, feedback=belief.feedback.append(record)
    )


def expected_weight(belief: BeliefState) -> np.ndarray:
    """Posterior-mass-weighted mean of the hypothesis weights."""
    return belief.masses @ belief.weight_matrix


def map_weight(belief: BeliefState) -> np.ndarray:
    """Weight of the maximum-a-posteriori hypothesis (lowest index on ties)."""
    return belief.hypotheses[int(np.argmax(belief.log_mass))].weight


def estimate_weight(belief: BeliefState) -> np.ndarray:
    """Expected weight, falling back to the MAP weight if it cancels to zero."""
    w = expected_weight(belief)
    if np.linalg.norm(w) < 1e-12:
        return map_weight(belief)
    return w


def feasible(
    seq: FeedbackSequence,
    w,
    bounds: WeightBounds,
    tol: float = 1e-9,
    mode: ObjectiveMode | None = None,
) -> bool:
    """Deterministic-feedback consistency: A^k w <= tol (within bounds).

    In reward mode the preference inequality flips sign, so rows are
    tested as delta . w >= -tol.
    """
    mode = seq.mode if mode is None else mode
    w = as_weight(w)
    if not bounds.contains(w, tol):
        return False
    if not seq.records:
        return True
    vals = seq.matrix @ w
    if mode is ObjectiveMode.COST:
        return bool(np.all(vals <= tol))
    return bool(np.all(vals >= -tol))
