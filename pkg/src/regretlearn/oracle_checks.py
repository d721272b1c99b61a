"""Runs the brute-force oracles against the fast paths on small instances.

Used by the `oracle` CLI subcommand; the test suite runs the same
comparisons at larger scale.
"""

from __future__ import annotations

import numpy as np

from . import oracles
from .belief import BeliefState, FeedbackRecord, FeedbackSequence, sample_omega, update
from .core import WeightBounds, cost
from .gridworld import GridEnvironment, GridMap, Region, grid_optimal_path
from .selectors import Converged, max_regret_feasible, select_entropy, select_max_regret


def random_small_map(rng: np.random.Generator) -> GridMap:
    """A random enumerable map with guard-respecting bounds."""
    width = int(rng.integers(2, 5))
    height = int(rng.integers(2, 5))
    cells = [(x, y) for x in range(width) for y in range(height)]
    start, goal = [cells[i] for i in rng.choice(len(cells), size=2, replace=False)]
    n_regions = int(rng.integers(1, 4))
    regions = []
    for i in range(n_regions):
        k = int(rng.integers(1, 1 + min(4, len(cells))))
        chosen = [cells[j] for j in rng.choice(len(cells), size=k, replace=False)]
        regions.append(Region(id=i, cells=frozenset(chosen)))
    overlap = max(
        sum(1 for r in regions if c in r.cells) for c in cells
    )
    t_lo = 0.4
    r_lo = -0.9 * t_lo / max(overlap, 1)
    bounds = WeightBounds(
        lower=[r_lo] * n_regions + [t_lo], upper=[1.0] * n_regions + [1.0]
    )
    return GridMap(
        width=width,
        height=height,
        regions=tuple(regions),
        start=start,
        goal=goal,
        step_time=float(rng.uniform(0.5, 3.0)),
        bounds=bounds,
    )


def check_planner(seed: int, n_maps: int = 25) -> list:
    rng = np.random.default_rng(seed)
    bad = []
    for i in range(n_maps):
        grid = random_small_map(rng)
        w = grid.bounds.sample(rng, 1)[0]
        fast = grid_optimal_path(grid, w)
        # Exact optimality: no enumerated simple path costs less under the
        # same costing function (avoids summation-order ties).
        worst = min(cost(p, w) - cost(fast, w) for p in oracles.enumerate_paths(grid, 100_000))
        if worst < 0.0:
            bad.append((i, float(worst)))
    return bad


def _random_belief(env, rng, n_omega: int) -> BeliefState:
    hyps = sample_omega(env, env.bounds, n_omega, int(rng.integers(2**31)))
    belief = BeliefState.uniform(hyps, 0.85, env.mode)
    k = int(rng.integers(0, 4))
    for _ in range(k):
        i, j = rng.choice(len(hyps), size=2, replace=False)
        a, b = hyps[int(i)].opt_path, hyps[int(j)].opt_path
        belief = update(belief, FeedbackRecord.from_paths(a, b))
    return belief


def _diff_selector(name, fast_fn, brute_result, bad, case):
    try:
        got = fast_fn()
    except Converged:
        got = None
    got_ix = (got.index_a, got.index_b) if got is not None else None
    want_ix = brute_result[:2] if brute_result is not None else None
    if got_ix != want_ix:
        bad.append((name, case, got_ix, want_ix))


def check_selectors(seed: int, n_beliefs: int = 30) -> list:
    rng = np.random.default_rng(seed)
    env = GridEnvironment(random_small_map(np.random.default_rng(seed + 1)))
    bad = []
    for i in range(n_beliefs):
        belief = _random_belief(env, rng, int(rng.integers(5, 15)))
        _diff_selector(
            "regret",
            lambda: select_max_regret(belief),
            oracles.brute_max_regret_pair(belief),
            bad,
            i,
        )
        _diff_selector(
            "entropy",
            lambda: select_entropy(belief),
            oracles.brute_entropy_pair(belief),
            bad,
            i,
        )
        _diff_selector(
            "feasible",
            lambda: max_regret_feasible(belief.feedback, belief.hypotheses, env.bounds, env),
            oracles.brute_feasible_regret_pair(
                belief.feedback, belief.hypotheses, env.bounds, env.mode
            ),
            bad,
            i,
        )
    return bad


def check_posterior(seed: int, n_runs: int = 30) -> list:
    rng = np.random.default_rng(seed)
    env = GridEnvironment(random_small_map(np.random.default_rng(seed + 2)))
    bad = []
    for i in range(n_runs):
        hyps = sample_omega(env, env.bounds, int(rng.integers(3, 10)), int(rng.integers(2**31)))
        belief = BeliefState.uniform(hyps, 0.85, env.mode)
        records = []
        for _ in range(int(rng.integers(1, 8))):
            a, b = rng.choice(len(hyps), size=2, replace=False)
            rec = FeedbackRecord.from_paths(hyps[int(a)].opt_path, hyps[int(b)].opt_path)
            records.append(rec)
            belief = update(belief, rec)
        want = oracles.posterior_product(hyps, records, 0.85, env.mode)
        if np.max(np.abs(belief.masses - np.array(want))) > 1e-12:
            bad.append((i, float(np.max(np.abs(belief.masses - np.array(want))))))
    return bad


def run_all(seed: int = 0, verbose: bool = False) -> int:
    """Run every oracle diff; returns the number of failing groups."""
    failures = 0
    for name, fn in (
        ("planner-vs-enumeration", check_planner),
        ("selectors-vs-brute-force", check_selectors),
        ("posterior-vs-product", check_posterior),
    ):
        bad = fn(seed)
        status = "PASS" if not bad else f"FAIL ({len(bad)} mismatches)"
        if verbose:
            print(f"{name}: {status}")
            for entry in bad[:5]:
                print("  ", entry)
        failures += bool(bad)
    return failures
