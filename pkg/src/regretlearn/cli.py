"""Command-line entry points: single runs, studies, correlation studies,
oracle diffing and the HTTP service."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .experiments import (
    ExperimentConfig,
    generalization_study,
    run_learning,
    make_user,
    run_study,
)
from .presets import build_env, driver_scene
from .driver import DriverEnvironment


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--env", default="mobile", help="preset name or JSON file with an env config")
    parser.add_argument("--selector", default="regret",
                        choices=("regret", "entropy", "random", "regret-feasible"))
    parser.add_argument("--user", default="softmax", choices=("softmax", "flat", "deterministic"))
    parser.add_argument("-K", "--iterations", type=int, default=10)
    parser.add_argument("--omega", type=int, default=200)
    parser.add_argument("--p", type=float, default=0.85)
    parser.add_argument("--seed", type=int, default=0)


def _env_spec(arg: str):
    if arg.endswith(".json"):
        with open(arg) as fh:
            return json.load(fh)
    return arg


def cmd_run(args) -> int:
    spec = _env_spec(args.env)
    env = build_env(spec)
    cfg = ExperimentConfig(
        environment=spec,
        selector=args.selector,
        user_model=args.user,
        iterations=args.iterations,
        omega=args.omega,
        p=args.p,
        seed=args.seed,
    )
    user = make_user(cfg, env, trial_index=0)
    result = run_learning(cfg, env, user)
    print(f"selector={cfg.selector} user={cfg.user_model} omega={cfg.omega} seed={cfg.seed}")
    print("iter  weight_err  path_err   correct_p  pair       converged")
    for r in result.records:
        cp = f"{r.correct_prob:.4f}" if r.correct_prob is not None else "   -  "
        pair = f"{r.pair}" if r.pair else "-"
        print(
            f"{r.iteration:4d}  {r.weight_error:.6f}  {r.path_error:.6f}  "
            f"{cp}  {pair:10s} {'yes' if r.converged else ''}"
        )
    print("final weight:", np.array2string(result.final_weight, precision=4))
    return 0


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    cfg = ExperimentConfig(**doc)
    result = run_study(cfg)
    last = result.summary["per_iteration"][-1]
    print(
        f"{cfg.trials} trials x {cfg.iterations} iterations "
        f"({cfg.selector}, {cfg.user_model} user)"
    )
    print(
        "final path error: median=%.6f mean=%.6f"
        % (last["path_error"]["median"], last["path_error"]["mean"])
    )
    if cfg.out:
        print(f"wrote {cfg.out}")
    return 0


def cmd_generalize(args) -> int:
    train = DriverEnvironment(driver_scene(extended=args.extended, variant=0))
    tests = [
        DriverEnvironment(driver_scene(extended=args.extended, variant=v))
        for v in range(1, 6)
    ]
    report = generalization_study(train, tests, args.users, args.estimates, seed=args.seed)
    print(f"users={args.users} estimates={args.estimates}")
    print(f"pearson(train path err, test path err)   = {report.pearson_path:.4f}")
    print(f"pearson(train weight err, test path err) = {report.pearson_weight:.4f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
        print(f"wrote {args.out}")
    return 0


def cmd_oracle(args) -> int:
    from . import oracle_checks

    failures = oracle_checks.run_all(seed=args.seed, verbose=True)
    return 1 if failures else 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="regretlearn")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one learning session and print the trace")
    _add_common(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_exp = sub.add_parser("experiment", help="run a study from a JSON config")
    p_exp.add_argument("config", help="path to an ExperimentConfig JSON document")
    p_exp.set_defaults(fn=cmd_experiment)

    p_gen = sub.add_parser("generalize", help="driver training-vs-test correlation study")
    p_gen.add_argument("--users", type=int, default=20)
    p_gen.add_argument("--estimates", type=int, default=50)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--extended", action="store_true")
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(fn=cmd_generalize)

    p_orc = sub.add_parser("oracle", help="diff fast paths against brute-force oracles")
    p_orc.add_argument("--seed", type=int, default=0)
    p_orc.set_defaults(fn=cmd_oracle)

    p_srv = sub.add_parser("serve", help="serve the human-in-the-loop HTTP API")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--data-dir", default="./sessions")
    p_srv.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
