"""Independently coded brute-force references for the fast paths.

Everything here recomputes results from first principles with plain
Python loops: path costs by per-cell stage accumulation, posteriors by
evaluating the full likelihood product, selectors by exhaustive pair
enumeration. Tests and the `oracle` CLI diff these against the
production implementations on small instances.
"""

from __future__ import annotations

import math

from .belief import BeliefState, FeedbackSequence, Hypothesis
from .core import ObjectiveMode, WeightBounds
from .gridworld import GridMap, enumerate_paths

__all__ = [
    "stage_cost_sum",
    "brute_optimal",
    "posterior_product",
    "brute_max_regret_pair",
    "brute_entropy_pair",
    "brute_feasible_regret_pair",
]


def stage_cost_sum(grid: GridMap, cells, w) -> float:
    """Path cost accumulated per entered cell and per move."""
    w = list(w)
    region_w, time_w = w[:-1], w[-1]
    total = 0.0
    for k, cell in enumerate(cells):
        if k > 0:
            total += time_w * grid.step_time
        for region, wr in zip(grid.regions, region_w):
            if cell in region.cells:
                total += wr * grid.step_time
    return total


def brute_optimal(grid: GridMap, w, cap: int = 100_000):
    """Minimum-cost simple path by exhaustive enumeration."""
    best_cost = math.inf
    best = None
    for path in enumerate_paths(grid, cap):
        c = stage_cost_sum(grid, path.states, w)
        if c < best_cost:
            best_cost = c
            best = path
    return best, best_cost


def _dot(a, b) -> float:
    return sum(x * y for x, y in zip(a, b))


def posterior_product(
    hypotheses, records, p: float, mode: ObjectiveMode
) -> list:
    """Normalized posterior from the plain product of per-record likelihoods."""
    masses = []
    for h in hypotheses:
        m = 1.0
        for rec in records:
            c_pref = _dot(rec.preferred.features, h.weight)
            c_rej = _dot(rec.rejected.features, h.weight)
            ok = c_pref <= c_rej if mode is ObjectiveMode.COST else c_pref >= c_rej
            m *= p if ok else 1.0 - p
        masses.append(m)
    total = sum(masses)
    if total <= 0.0:
        raise ZeroDivisionError("all product masses vanished")
    return [m / total for m in masses]


def _pair_regret(a: Hypothesis, b: Hypothesis, mode: ObjectiveMode) -> float:
    """r(a, b): a's path evaluated under b's weight against b's optimum."""
    c_ab = _dot(a.opt_path.features, b.weight)
    if mode is ObjectiveMode.COST:
        return c_ab / b.opt_cost
    return 1.0 - (c_ab + b.offset) / (b.opt_cost + b.offset)


def _sym(a: Hypothesis, b: Hypothesis, mode: ObjectiveMode) -> float:
    return _pair_regret(a, b, mode) + _pair_regret(b, a, mode)


def _answerable(a: Hypothesis, b: Hypothesis) -> bool:
    """Pairs are eligible only if their paths differ in features."""
    return list(a.opt_path.features) != list(b.opt_path.features)


def _distinct_pairs(hypotheses):
    n = len(hypotheses)
    for i in range(n):
        for j in range(i + 1, n):
            if _answerable(hypotheses[i], hypotheses[j]):
                yield i, j


def brute_max_regret_pair(belief: BeliefState):
    """Exhaustive argmax of mass-discounted symmetric regret."""
    m = belief.masses
    hyps = belief.hypotheses
    best = None
    for i, j in _distinct_pairs(hyps):
        score = float(m[i]) * float(m[j]) * _sym(hyps[i], hyps[j], belief.mode)
        if best is None or score > best[2]:
            best = (i, j, score)
    return best


def _answer_prob(a: Hypothesis, b: Hypothesis, w, mode: ObjectiveMode) -> float:
    """Softmax probability that a user with weight w prefers a's path."""
    u_a = _dot(a.opt_path.features, w)
    u_b = _dot(b.opt_path.features, w)
    if mode is ObjectiveMode.COST:
        u_a, u_b = -u_a, -u_b
    gap = u_a - u_b
    if gap >= 0:
        return 1.0 / (1.0 + math.exp(-gap))
    return math.exp(gap) / (1.0 + math.exp(gap))


def _h2(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -(q * math.log2(q) + (1.0 - q) * math.log2(1.0 - q))


def brute_entropy_pair(belief: BeliefState):
    """Exhaustive argmax of expected information gain (softmax answers)."""
    m = belief.masses
    hyps = belief.hypotheses
    best = None
    for i, j in _distinct_pairs(hyps):
        marginal = 0.0
        expected_h = 0.0
        for h, mass in zip(hyps, m):
            q = _answer_prob(hyps[i], hyps[j], h.weight, belief.mode)
            marginal += float(mass) * q
            expected_h += float(mass) * _h2(q)
        score = _h2(marginal) - expected_h
        if best is None or score > best[2]:
            best = (i, j, score)
    return best


def brute_feasible_regret_pair(
    seq: FeedbackSequence,
    omega,
    bounds: WeightBounds,
    mode: ObjectiveMode,
    tol: float = 1e-9,
):
    """Filter-then-enumerate version of the deterministic-case selector."""

    def ok(h: Hypothesis) -> bool:
        w = h.weight
        for lo, hi, v in zip(bounds.lower, bounds.upper, w):
            if v < lo - tol or v > hi + tol:
                return False
        for rec in seq.records:
            val = _dot(rec.delta, w)
            if mode is ObjectiveMode.COST and val > tol:
                return False
            if mode is ObjectiveMode.REWARD and val < -tol:
                return False
        return True

    keep = [i for i, h in enumerate(omega) if ok(h)]
    if len(keep) < 2:
        return None
    best = None
    for ai in range(len(keep)):
        for bi in range(ai + 1, len(keep)):
            i, j = keep[ai], keep[bi]
            if not _answerable(omega[i], omega[j]):
                continue
            score = _sym(omega[i], omega[j], mode)
            if best is None or score > best[2]:
                best = (i, j, score)
    return best
