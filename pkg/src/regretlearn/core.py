"""Linear trajectory cost model, error metrics and regret quantities.

Weights and features are plain 1-D numpy arrays of equal dimension d.
A path's cost is the dot product of its feature vector with a weight
vector; every other quantity in the package is derived from that.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

__all__ = [
    "ContractError",
    "PlannerError",
    "DegenerateObjectiveError",
    "ObjectiveMode",
    "WeightBounds",
    "Path",
    "Environment",
    "as_weight",
    "cost",
    "optimal_cost",
    "err_weight",
    "err_path",
    "err_path_given",
    "regret",
    "regret_of_path",
    "symmetric_regret",
]

# Additive shift floor used when forming reward-mode cost ratios.
REGRET_SHIFT_EPS = 1e-6


class ContractError(ValueError):
    """An operation was called with arguments violating its contract."""


class PlannerError(RuntimeError):
    """The environment's optimal-path search failed."""


class DegenerateObjectiveError(ValueError):
    """A cost ratio was requested with a nonpositive optimal cost."""


class ObjectiveMode(enum.Enum):
    """Whether optimal paths minimize (cost) or maximize (reward) c."""

    COST = "cost"
    REWARD = "reward"

    def prefers(self, c_first: float, c_second: float) -> bool:
        """True iff a path with cost `c_first` is at least as good as `c_second`."""
        if self is ObjectiveMode.COST:
            return c_first <= c_second
        return c_first >= c_second


def as_weight(values, dim: int | None = None) -> np.ndarray:
    """Validate and return a finite 1-D float array."""
    w = np.asarray(values, dtype=float)
    if w.ndim != 1:
        raise ContractError(f"weight/feature vector must be 1-D, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ContractError("weight/feature vector contains non-finite entries")
    if dim is not None and w.shape[0] != dim:
        raise ContractError(f"expected dimension {dim}, got {w.shape[0]}")
    return w


@dataclass(frozen=True)
class WeightBounds:
    """Per-dimension box l_i <= w_i <= u_i for admissible weights."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_weight(self.lower)
        hi = as_weight(self.upper, dim=lo.shape[0])
        if np.any(lo > hi):
            raise ContractError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, w, tol: float = 0.0) -> bool:
        w = as_weight(w, dim=self.dim)
        return bool(np.all(w >= self.lower - tol) and np.all(w <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n i.i.d. uniform draws from the box, shape (n, d)."""
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


@dataclass(frozen=True, eq=False)
class Path:
    """A finite trajectory with its cached feature vector.

    `optimal_for` records provenance: the weight this path was planned
    for, if any. Identity (equality/hashing) is environment-specific and
    defined by subclasses via `identity()`.
    """

    states: tuple
    features: np.ndarray
    optimal_for: np.ndarray | None = None

    def __post_init__(self):
        if len(self.states) == 0:
            raise ContractError("path has no states")
        object.__setattr__(self, "features", as_weight(self.features))

    def identity(self) -> Hashable:
        return self.states

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.identity() == other.identity()

    def __hash__(self) -> int:
        return hash(self.identity())


class Environment(ABC):
    """A planning domain: feature map, weight box and optimal-path search."""

    mode: ObjectiveMode
    bounds: WeightBounds

    @property
    def feature_dim(self) -> int:
        return self.bounds.dim

    @abstractmethod
    def path_features(self, path: Path) -> np.ndarray:
        """Recompute the feature vector of `path` from its states."""

    @abstractmethod
    def optimal_path(self, w) -> Path:
        """Best path under weight `w` (min cost, or max in reward mode)."""

    def cost_offset(self, w) -> float:
        """Additive shift applied to costs before reward-mode ratios.

        Zero for cost-mode environments; reward environments return a
        constant making all candidate costs strictly positive under `w`.
        """
        return 0.0

    def supports_weight(self, w) -> bool:
        """Whether `optimal_path` is well defined for this exact weight."""
        return True


def cost(path: Path, w) -> float:
    """Path cost c(P, w) = phi(P) . w."""
    w = as_weight(w)
    if path.features.shape != w.shape:
        raise ContractError(
            f"feature dim {path.features.shape[0]} != weight dim {w.shape[0]}"
        )
    return float(np.dot(path.features, w))


def optimal_cost(env: Environment, w) -> float:
    """c*(w): cost of the environment's optimal path under w."""
    return cost(env.optimal_path(w), w)


def err_weight(w, w_user) -> float:
    """Normalized angular error between weight vectors, in [0, 1].

    0 for identical directions, 1/2 for orthogonal, 1 for antiparallel.
    Invariant to positive rescaling of either argument.
    """
    w = as_weight(w)
    w_user = as_weight(w_user, dim=w.shape[0])
    nw = np.linalg.norm(w)
    nu = np.linalg.norm(w_user)
    if nw == 0.0 or nu == 0.0:
        raise ContractError("err_weight undefined for zero-norm weights")
    cosang = float(np.dot(w, w_user) / (nw * nu))
    cosang = min(1.0, max(-1.0, cosang))
    return 0.5 * (1.0 - cosang)


def _ratio(c_num: float, c_den: float, offset: float, mode: ObjectiveMode) -> float:
    if mode is ObjectiveMode.COST:
        if c_den <= 0.0:
            raise DegenerateObjectiveError(
                f"cost-mode ratio needs positive optimal cost, got {c_den}"
            )
        return c_num / c_den
    den = c_den + offset
    if den <= 0.0:
        raise DegenerateObjectiveError(
            f"shifted optimal reward must be positive, got {den}"
        )
    return (c_num + offset) / den


def err_path_given(
    cost_p: float, opt_cost_val: float, offset: float, mode: ObjectiveMode
) -> float:
    """Path error from precomputed costs (see err_path)."""
    ratio = _ratio(cost_p, opt_cost_val, offset, mode)
    return ratio - 1.0 if mode is ObjectiveMode.COST else 1.0 - ratio


def err_path(p: Path, w_user, env: Environment) -> float:
    """Relative suboptimality of `p` under the true weights.

    Cost mode: c(P, w)/c*(w) - 1. Reward mode: 1 - c(P, w)/c*(w) on
    shifted costs. Zero iff `p` achieves the optimal cost.
    """
    w_user = as_weight(w_user)
    return err_path_given(
        cost(p, w_user), optimal_cost(env, w_user), env.cost_offset(w_user), env.mode
    )


def regret_of_path(p: Path, w_q, env: Environment) -> float:
    """Regret of an already-planned path under evaluating weight `w_q`."""
    ratio = _ratio(cost(p, w_q), optimal_cost(env, w_q), env.cost_offset(w_q), env.mode)
    if env.mode is ObjectiveMode.COST:
        return ratio
    return 1.0 - ratio


def regret(w_p, w_q, env: Environment) -> float:
    """Regret r(w^P, w^Q) of w^P's optimal path evaluated by w^Q.

    In cost mode this is the ratio c(P, w^Q)/c*(w^Q) >= 1; in reward
    mode it is 1 - c(P, w^Q)/c*(w^Q) >= 0 (on shifted costs).
    """
    return regret_of_path(env.optimal_path(w_p), w_q, env)


def symmetric_regret(w_p, w_q, env: Environment) -> float:
    """r(w^P, w^Q) + r(w^Q, w^P); symmetric in its arguments."""
    return regret(w_p, w_q, env) + regret(w_q, w_p, env)
