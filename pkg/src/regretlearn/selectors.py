"""Query-pair selection over the fixed hypothesis set.

All selectors score ordered-into-unordered pairs of hypotheses with
distinct optimal paths and break ties toward the smallest index pair.
Pair scoring uses a cost matrix c(P_i, w_j) built once per hypothesis
set and reused across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateObjectiveError, Environment, ObjectiveMode, WeightBounds
from .belief import BeliefState, FeedbackSequence, Hypothesis, feasible

__all__ = [
    "Converged",
    "QueryPair",
    "prob_symmetric_regret",
    "select_max_regret",
    "select_entropy",
    "select_random",
    "max_regret_feasible",
]


class Converged(Exception):
    """No informative pair is left; the caller should stop querying."""


@dataclass(frozen=True)
class QueryPair:
    """An unordered hypothesis pair with its selector score."""

    a: Hypothesis
    b: Hypothesis
    index_a: int
    index_b: int
    score: float
    near_converged: bool = False


class _PairContext:
    """Per-hypothesis-set matrices shared by all selectors.

    cost[i, j] = c(P_i, w_j); sym[i, j] = r(w_i, w_j) + r(w_j, w_i);
    distinct[i, j] marks pairs whose optimal paths differ.
    """

    def __init__(self, hypotheses: tuple, mode: ObjectiveMode):
        self.hypotheses = hypotheses
        self.mode = mode
        feats = np.array([h.opt_path.features for h in hypotheses])
        weights = np.array([h.weight for h in hypotheses])
        self.cost = feats @ weights.T
        opt = np.diagonal(self.cost).copy()
        if mode is ObjectiveMode.COST:
            if np.any(opt <= 0.0):
                raise DegenerateObjectiveError("nonpositive optimal cost in hypothesis set")
            ratio = self.cost / opt[None, :]
            self.regret = ratio
        else:
            off = np.array([h.offset for h in hypotheses])
            den = opt + off
            if np.any(den <= 0.0):
                raise DegenerateObjectiveError("nonpositive shifted optimal reward")
            self.regret = 1.0 - (self.cost + off[None, :]) / den[None, :]
        self.sym = self.regret + self.regret.T

        # Pairs whose paths coincide, or whose features coincide exactly
        # (making them cost-equal under every weight), are unanswerable
        # and excluded from selection.
        labels: dict = {}
        lab = np.empty(len(hypotheses), dtype=int)
        for i, h in enumerate(hypotheses):
            lab[i] = labels.setdefault(tuple(h.opt_path.features), len(labels))
        self.path_label = lab
        self.distinct = lab[:, None] != lab[None, :]
        # First hypothesis index per path class, in class-label order.
        first: dict = {}
        for i, c in enumerate(lab):
            first.setdefault(int(c), i)
        self.class_rep = np.array([first[c] for c in range(len(first))])
        self._answer_prob = None
        self._answer_entropy = None

    def entropy_tables(self):
        """Softmax answer probabilities and entropies per class pair.

        Scored over path-feature classes rather than raw pairs: pairs in
        the same classes share features, hence identical answer models.
        Shapes are (n_classes, n_classes, n_hypotheses).
        """
        if self._answer_prob is None:
            util = self.cost if self.mode is ObjectiveMode.REWARD else -self.cost
            util = util[self.class_rep]
            gap = util[:, None, :] - util[None, :, :]  # u_a - u_b under w_h
            self._answer_prob = _sigmoid(gap)
            self._answer_entropy = _binary_entropy(self._answer_prob)
        return self._answer_prob, self._answer_entropy


_CONTEXTS: dict = {}


def _context(hypotheses: tuple, mode: ObjectiveMode) -> _PairContext:
    ctx = _CONTEXTS.get(id(hypotheses))
    if ctx is not None and ctx.hypotheses is hypotheses and ctx.mode is mode:
        return ctx
    ctx = _PairContext(hypotheses, mode)
    if len(_CONTEXTS) >= 8:
        _CONTEXTS.pop(next(iter(_CONTEXTS)))
    _CONTEXTS[id(hypotheses)] = ctx
    return ctx


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _binary_entropy(q: np.ndarray) -> np.ndarray:
    """Entropy of a Bernoulli(q), in bits, with 0 log 0 = 0."""
    q = np.clip(q, 0.0, 1.0)
    out = np.zeros_like(q)
    inner = (q > 0.0) & (q < 1.0)
    qi = q[inner]
    out[inner] = -(qi * np.log2(qi) + (1.0 - qi) * np.log2(1.0 - qi))
    return out


def _argmax_pair(scores: np.ndarray, eligible: np.ndarray):
    """Best upper-triangle eligible entry; ties go to the smallest (i, j)."""
    n = scores.shape[0]
    masked = np.where(np.triu(eligible, k=1), scores, -np.inf)
    flat = int(np.argmax(masked))
    i, j = divmod(flat, n)
    if not np.isfinite(masked[i, j]):
        raise Converged("no eligible hypothesis pair with distinct optimal paths")
    return i, j, float(masked[i, j])


def _pair(belief_or_hyps, i: int, j: int, score: float, near: bool) -> QueryPair:
    hyps = belief_or_hyps
    return QueryPair(
        a=hyps[i], b=hyps[j], index_a=i, index_b=j, score=score, near_converged=near
    )


def prob_symmetric_regret(a: Hypothesis, b: Hypothesis, belief: BeliefState) -> float:
    """Posterior-discounted symmetric regret P(a) P(b) (r(a,b) + r(b,a))."""
    ia = _index_of(belief, a)
    ib = _index_of(belief, b)
    ctx = _context(belief.hypotheses, belief.mode)
    m = belief.masses
    return float(m[ia] * m[ib] * (ctx.regret[ia, ib] + ctx.regret[ib, ia]))


def _index_of(belief: BeliefState, h: Hypothesis) -> int:
    for i, cand in enumerate(belief.hypotheses):
        if cand is h:
            return i
    raise ValueError("hypothesis is not a member of the belief's set")


def select_max_regret(belief: BeliefState, env: Environment | None = None) -> QueryPair:
    """Pair maximizing posterior-discounted symmetric regret.

    Flags `near_converged` when every eligible pair scores zero (e.g. a
    point-mass posterior), in which case the tie-break-first pair is
    returned.
    """
    ctx = _context(belief.hypotheses, belief.mode)
    m = belief.masses
    scores = m[:, None] * m[None, :] * ctx.sym
    i, j, score = _argmax_pair(scores, ctx.distinct)
    return _pair(belief.hypotheses, i, j, score, near=score <= 0.0)


def select_entropy(belief: BeliefState) -> QueryPair:
    """Pair maximizing expected information gain about the weights.

    The answer model is the softmax user: the marginal answer entropy
    minus the posterior-expected conditional entropy, in bits. Gains are
    computed per path class; the winner maps back to the smallest
    hypothesis index pair, matching exhaustive-pair tie-breaking.
    """
    ctx = _context(belief.hypotheses, belief.mode)
    q, hq = ctx.entropy_tables()
    m = belief.masses
    marginal = q @ m
    gains = _binary_entropy(marginal) - hq @ m
    n_cls = gains.shape[0]
    if n_cls < 2:
        raise Converged("no eligible hypothesis pair with distinct optimal paths")
    np.fill_diagonal(gains, -np.inf)
    best = float(np.max(gains))
    # All class pairs achieving the maximum; pick the lexicographically
    # smallest hypothesis pair among them.
    members: dict = {}
    for idx, c in enumerate(ctx.path_label):
        members.setdefault(int(c), []).append(idx)
    cand = None
    for ca, cb in zip(*np.nonzero(gains == best)):
        ia = members[int(ca)][0]
        ib = members[int(cb)][0]
        i, j = (ia, ib) if ia < ib else (ib, ia)
        if cand is None or (i, j) < cand:
            cand = (i, j)
    i, j = cand
    return _pair(belief.hypotheses, i, j, best, near=best <= 0.0)


def select_random(belief: BeliefState, seed) -> QueryPair:
    """Uniformly random distinct-path pair; deterministic given the seed."""
    ctx = _context(belief.hypotheses, belief.mode)
    n = len(belief.hypotheses)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if ctx.distinct[i, j]]
    if not pairs:
        raise Converged("no eligible hypothesis pair with distinct optimal paths")
    rng = np.random.default_rng(seed)
    i, j = pairs[int(rng.integers(len(pairs)))]
    return _pair(belief.hypotheses, i, j, float(ctx.sym[i, j]), near=False)


def max_regret_feasible(
    seq: FeedbackSequence,
    omega: tuple,
    bounds: WeightBounds,
    env: Environment,
    tol: float = 1e-9,
) -> QueryPair:
    """Deterministic-case selector: maximize plain symmetric regret over
    the hypotheses still consistent with every feedback inequality."""
    omega = tuple(omega)
    keep = np.array(
        [feasible(seq, h.weight, bounds, tol=tol, mode=env.mode) for h in omega]
    )
    if int(keep.sum()) < 2:
        raise Converged("fewer than two feasible hypotheses remain")
    ctx = _context(omega, env.mode)
    eligible = ctx.distinct & keep[:, None] & keep[None, :]
    i, j, score = _argmax_pair(ctx.sym, eligible)
    return _pair(omega, i, j, score, near=False)
