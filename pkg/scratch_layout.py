"""Scratch: search for a mobile map layout with paper-scale solution space."""
import numpy as np
import dataclasses
from regretlearn.experiments import ExperimentConfig, run_study
from regretlearn.gridworld import GridEnvironment, GridMap, Region
from regretlearn.core import WeightBounds, err_path, err_weight
from regretlearn.belief import BeliefState, FeedbackRecord, sample_omega, update, estimate_weight
from regretlearn.selectors import select_max_regret, select_entropy, Converged
from regretlearn.users import SimulatedUser, answer, correct_prob


def overlap_barrier_layout(width=12, overlap=3, barrier_ys=(2, 5, 8), doors=((9, 11), (1, 3), (9, 11))):
    """Three full-width barriers, one door each; each side is `overlap` stacked regions."""
    rects = []
    for y, (d0, d1) in zip(barrier_ys, doors):
        for (a, b) in ((0, d0), (d1, width)):
            if b > a:
                for _ in range(overlap):
                    rects.append((a, y, b - a, 1))
    return rects


def env_from(rects, r_lo, r_hi, t_lo, t_hi, step=3.0, W=12, H=12, start=(0, 0), goal=None):
    regions = tuple(
        Region(id=i, cells=frozenset((x0 + dx, y0 + dy) for dx in range(w) for dy in range(h)))
        for i, (x0, y0, w, h) in enumerate(rects)
    )
    n = len(regions)
    b = WeightBounds(lower=[r_lo] * n + [t_lo], upper=[r_hi] * n + [t_hi])
    g = GridMap(width=W, height=H, regions=regions, start=start, goal=goal or (W - 1, H - 1),
                step_time=step, bounds=b)
    return GridEnvironment(g)


def box_user(env, rng):
    w = env.bounds.sample(rng, 1)[0]
    return w / np.linalg.norm(w)


def pilot(env, tag, trials=20, omega=300, K=8, selector='regret'):
    rng = np.random.default_rng(42)
    ids, feats = set(), set()
    for w in env.bounds.sample(rng, 1000):
        p = env.optimal_path(w)
        ids.add(p.identity())
        feats.add(tuple(np.round(p.features, 9)))
    urng = np.random.default_rng(1234)
    errs5, errsK, cps = [], [], []
    sel = select_max_regret if selector == 'regret' else select_entropy
    for t in range(trials):
        hyps = sample_omega(env, env.bounds, omega, 50 + t)
        w_user = box_user(env, urng)
        user = SimulatedUser(w_user=w_user, mode=env.mode, model='softmax', seed=900 + t)
        belief = BeliefState.uniform(hyps, 0.85, env.mode)
        for k in range(1, K + 1):
            try:
                pair = sel(belief)
            except Converged:
                break
            P, Q = pair.a.opt_path, pair.b.opt_path
            cps.append(correct_prob(user, P, Q))
            ch = answer(user, P, Q)
            belief = update(belief, FeedbackRecord.from_paths(ch, Q if ch is P else P))
            if k == 5:
                w5 = estimate_weight(belief)
                errs5.append(err_path(env.optimal_path(w5), w_user, env))
        wK = estimate_weight(belief)
        errsK.append(err_path(env.optimal_path(wK), w_user, env))
    errs5 = np.array(errs5); errsK = np.array(errsK)
    print(f'{tag}: ids={len(ids)} feats={len(feats)} | med5={np.median(errs5):.4f} '
          f'frac@5={np.mean(errs5 < 0.05):.2f} medK={np.median(errsK):.4f} cp={np.mean(cps):.3f}')


if __name__ == '__main__':
    rects = overlap_barrier_layout()
    print(f'{len(rects)} regions')
    pilot(env_from(rects, -0.14, 1.0, 0.45, 1.0), 'ovl3 r[-.14,1] t[.45,1]')
    pilot(env_from(rects, -0.14, 0.7, 0.45, 1.0), 'ovl3 r[-.14,.7] t[.45,1]')
    # old 16-block layout with in-cone users for comparison
    from regretlearn.presets import _MOBILE_RECTS
    pilot(env_from(_MOBILE_RECTS, -0.2, 0.2, 0.4, 1.0), 'blocks sym in-cone users')
