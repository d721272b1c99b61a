"""End-to-end learning sessions, multi-trial studies and statistics.

A trial runs the full loop: sample hypotheses, repeatedly select a
query pair, collect the simulated user's answer, update the posterior
and track weight/path errors of the running estimate. Studies repeat
trials with fresh hidden user weights and aggregate the metric traces.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .belief import (
    BeliefState,
    FeedbackRecord,
    estimate_weight,
    sample_omega,
    update,
)
from .core import (
    ContractError,
    Environment,
    Path,
    cost,
    err_path,
    err_path_given,
    err_weight,
    optimal_cost,
)
from .selectors import (
    Converged,
    QueryPair,
    max_regret_feasible,
    select_entropy,
    select_max_regret,
    select_random,
)
from .users import SimulatedUser, answer, correct_prob, sample_user_weight

__all__ = [
    "CorrelationUndefinedError",
    "ExperimentConfig",
    "IterationRecord",
    "TrialResult",
    "StudyResult",
    "GeneralizationReport",
    "run_learning",
    "run_study",
    "generalization_study",
    "pearson",
    "trial_rows_to_csv",
]

SELECTORS = ("regret", "entropy", "random", "regret-feasible")

CSV_HEADER = "trial,iteration,selector,weight_error,path_error,correct_prob,converged"


class CorrelationUndefinedError(ValueError):
    """Pearson correlation requested for a zero-variance column."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of a learning experiment."""

    environment: object = "mobile"  # preset name or config dict
    selector: str = "regret"
    user_model: str = "softmax"
    iterations: int = 10
    trials: int = 1
    omega: int = 200
    p: float = 0.85
    user_p: float = 0.85
    seed: int = 0
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1 or self.trials < 1 or self.omega < 2:
            raise ContractError("need iterations >= 1, trials >= 1, omega >= 2")
        if self.selector not in SELECTORS:
            raise ContractError(f"unknown selector {self.selector!r}")


@dataclass(frozen=True)
class IterationRecord:
    """Metrics after one query round (iteration 0 is the prior baseline)."""

    iteration: int
    weight_error: float
    path_error: float
    correct_prob: float | None
    pair: tuple | None
    answered_correctly: bool | None
    converged: bool


@dataclass(frozen=True)
class TrialResult:
    trial: int
    selector: str
    records: tuple
    final_weight: np.ndarray
    final_path: Path
    user_weight: np.ndarray


@dataclass(frozen=True)
class StudyResult:
    config: ExperimentConfig
    trials: tuple
    summary: dict


def _trial_seed_seqs(master_seed: int, trial_index: int):
    root = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return root.spawn(3)  # omega, user, selector


def make_selector(name: str, env: Environment, rng: np.random.Generator) -> Callable:
    """Bind a selector name to a callable of the belief state."""
    if name == "regret":
        return lambda belief: select_max_regret(belief, env)
    if name == "entropy":
        return lambda belief: select_entropy(belief)
    if name == "random":
        return lambda belief: select_random(belief, int(rng.integers(2**63)))
    if name == "regret-feasible":
        return lambda belief: max_regret_feasible(
            belief.feedback, belief.hypotheses, env.bounds, env
        )
    raise ContractError(f"unknown selector {name!r}")


def _estimate_errors(belief: BeliefState, env: Environment, user: SimulatedUser):
    w_est = estimate_weight(belief)
    p_est = env.optimal_path(w_est)
    return (
        w_est,
        p_est,
        err_weight(w_est, user.w_user),
        err_path(p_est, user.w_user, env),
    )


def run_learning(
    config: ExperimentConfig,
    env: Environment,
    user: SimulatedUser,
    *,
    trial_index: int = 0,
    omega_seed=None,
    selector_seed=None,
) -> TrialResult:
    """One full learning session against a (simulated) user.

    Follows the query loop exactly: sample the hypothesis set once,
    then per iteration select a pair, query the user, append the
    preferred-first feedback record and update the posterior. The
    estimate after k rounds is the optimal path of the expected weight.
    Iteration 0 logs the prior baseline, giving K+1 records.
    """
    omega_ss, _, selector_ss = _trial_seed_seqs(config.seed, trial_index)
    hyps = sample_omega(
        env, env.bounds, config.omega, omega_seed if omega_seed is not None else omega_ss
    )
    selector_rng = np.random.default_rng(
        selector_seed if selector_seed is not None else selector_ss
    )
    pick = make_selector(config.selector, env, selector_rng)
    belief = BeliefState.uniform(hyps, config.p, env.mode)

    records = []
    w_est, p_est, w_err, p_err = _estimate_errors(belief, env, user)
    records.append(
        IterationRecord(0, w_err, p_err, None, None, None, converged=False)
    )
    converged = False
    last_cp = None
    for k in range(1, config.iterations + 1):
        if not converged:
            try:
                pair = pick(belief)
            except Converged:
                converged = True
        if converged:
            records.append(
                IterationRecord(k, w_err, p_err, last_cp, None, None, converged=True)
            )
            continue
        p_path, q_path = pair.a.opt_path, pair.b.opt_path
        cp = correct_prob(user, p_path, q_path)
        choice = answer(user, p_path, q_path)
        other = q_path if choice is p_path else p_path
        was_correct = user.utility(choice) >= user.utility(other)
        belief = update(belief, FeedbackRecord.from_paths(choice, other))
        w_est, p_est, w_err, p_err = _estimate_errors(belief, env, user)
        last_cp = cp
        records.append(
            IterationRecord(
                k,
                w_err,
                p_err,
                cp,
                (pair.index_a, pair.index_b),
                was_correct,
                converged=False,
            )
        )
    return TrialResult(
        trial=trial_index,
        selector=config.selector,
        records=tuple(records),
        final_weight=w_est,
        final_path=p_est,
        user_weight=user.w_user,
    )


def make_user(config: ExperimentConfig, env: Environment, trial_index: int) -> SimulatedUser:
    """Fresh unit-norm hidden weight and answer stream for one trial."""
    _, user_ss, _ = _trial_seed_seqs(config.seed, trial_index)
    weight_ss, answer_ss = user_ss.spawn(2)
    w_user = sample_user_weight(env, np.random.default_rng(weight_ss))
    return SimulatedUser(
        w_user=w_user,
        mode=env.mode,
        model=config.user_model,
        p=config.user_p,
        seed=answer_ss,
    )


def _run_trial(env: Environment, config: ExperimentConfig, trial_index: int) -> TrialResult:
    user = make_user(config, env, trial_index)
    return run_learning(config, env, user, trial_index=trial_index)


def run_study(config: ExperimentConfig, env: Environment | None = None) -> StudyResult:
    """Run N independent trials and aggregate per-iteration metrics.

    Trials are independent given their index, so they may run in a
    process pool; aggregation always reduces in trial order.
    """
    if env is None:
        from .presets import build_env

        env = build_env(config.environment)
    indices = list(range(config.trials))
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            trials = list(pool.map(_run_trial, *zip(*[(env, config, i) for i in indices])))
    else:
        trials = [_run_trial(env, config, i) for i in indices]
    result = StudyResult(
        config=config, trials=tuple(trials), summary=_summarize(config, trials)
    )
    if config.out:
        write_study(result, config.out)
    return result


def _stats(values: Sequence[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {
        "mean": float(np.mean(arr)),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(np.min(arr)),
        "max": float(np.max(arr)),
    }


def _summarize(config: ExperimentConfig, trials: Sequence[TrialResult]) -> dict:
    per_iteration = []
    for k in range(config.iterations + 1):
        rows = [t.records[k] for t in trials]
        entry = {
            "iteration": k,
            "weight_error": _stats([r.weight_error for r in rows]),
            "path_error": _stats([r.path_error for r in rows]),
            "converged_fraction": float(np.mean([r.converged for r in rows])),
        }
        cps = [r.correct_prob for r in rows if r.correct_prob is not None]
        entry["correct_prob"] = _stats(cps) if cps else None
        per_iteration.append(entry)
    return {"selector": config.selector, "trials": config.trials, "per_iteration": per_iteration}


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def trial_rows_to_csv(trials: Sequence[TrialResult]) -> str:
    """Lossless fixed-schema CSV of every per-iteration record."""
    lines = [CSV_HEADER]
    for t in trials:
        for r in t.records:
            lines.append(
                ",".join(
                    [
                        str(t.trial),
                        str(r.iteration),
                        t.selector,
                        _fmt(r.weight_error),
                        _fmt(r.path_error),
                        _fmt(r.correct_prob),
                        "1" if r.converged else "0",
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def write_study(result: StudyResult, out_csv: str) -> None:
    """Write the results CSV plus a .summary.json sibling."""
    with open(out_csv, "w") as fh:
        fh.write(trial_rows_to_csv(result.trials))
    summary_path = (
        out_csv[:-4] + ".summary.json" if out_csv.endswith(".csv") else out_csv + ".summary.json"
    )
    with open(summary_path, "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ContractError("pearson needs two equal-length 1-D samples of size >= 2")
    if np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
        raise CorrelationUndefinedError("zero-variance column")
    return float(np.corrcoef(xs, ys)[0, 1])


@dataclass(frozen=True)
class GeneralizationReport:
    """Training-vs-test error scatter plus the two Pearson correlations."""

    train_path_error: np.ndarray
    train_weight_error: np.ndarray
    test_path_error: np.ndarray
    pearson_path: float
    pearson_weight: float

    def to_dict(self) -> dict:
        return {
            "pearson_path": self.pearson_path,
            "pearson_weight": self.pearson_weight,
            "scatter": {
                "train_path_error": self.train_path_error.tolist(),
                "train_weight_error": self.train_weight_error.tolist(),
                "test_path_error": self.test_path_error.tolist(),
            },
        }


def _noisy_estimates(
    env: Environment, w_user: np.ndarray, n: int, rng: np.random.Generator
) -> list:
    """Unit-norm perturbations of the user weight across noise scales."""
    out = []
    d = w_user.shape[0]
    while len(out) < n:
        sigma = math.exp(rng.uniform(math.log(0.01), math.log(2.0)))
        w = w_user + sigma * rng.normal(size=d)
        norm = np.linalg.norm(w)
        if norm < 1e-12:
            continue
        w = w / norm
        if env.supports_weight(w):
            out.append(w)
    return out


def generalization_study(
    train_env: Environment,
    test_envs: Sequence[Environment],
    n_users: int,
    n_estimates: int,
    seed: int = 0,
) -> GeneralizationReport:
    """How training errors predict path error on unseen scenarios.

    For each hidden user weight a spread of estimates is generated; each
    estimate contributes its training weight/path errors and its mean
    path error across the test environments.
    """
    if len(test_envs) < 1 or n_users < 2 or n_estimates < 2:
        raise ContractError("need >= 1 test env and >= 2 users and estimates")
    rng = np.random.default_rng(seed)
    envs = [train_env, *test_envs]
    train_p, train_w, test_p = [], [], []
    for _ in range(n_users):
        w_user = sample_user_weight(train_env, rng)
        opt = [(optimal_cost(e, w_user), e.cost_offset(w_user)) for e in envs]
        for w_est in _noisy_estimates(train_env, w_user, n_estimates, rng):
            errs = [
                err_path_given(cost(e.optimal_path(w_est), w_user), c, off, e.mode)
                for e, (c, off) in zip(envs, opt)
            ]
            train_p.append(errs[0])
            train_w.append(err_weight(w_est, w_user))
            test_p.append(float(np.mean(errs[1:])))
    train_p = np.asarray(train_p)
    train_w = np.asarray(train_w)
    test_p = np.asarray(test_p)
    return GeneralizationReport(
        train_path_error=train_p,
        train_weight_error=train_w,
        test_path_error=test_p,
        pearson_path=pearson(train_p, test_p),
        pearson_weight=pearson(train_w, test_p),
    )
