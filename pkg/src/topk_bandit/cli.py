"""Command-line interface.

Subcommands:
    hardness    print the difficulty report of an instance as JSON
    gen         write a generated mean vector to a file
    run         run one algorithm once and print the outcome as JSON
    experiment  run a seeded budget-grid experiment, write CSV (and JSON)
    lowerbound  print exact coin-distinguishing errors as (m, error) CSV

Exit codes: 0 success, 1 usage error, 2 data error.  The base seed falls
back to the TOPK_BANDIT_SEED environment variable when --seed is omitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import ALGORITHMS, ExperimentConfig, default_budget_grid, resolve_means, run_experiment
from .env import ArmEnvironment, Instance
from .hardness import aggregate_regret, hardness
from .instances import gen_synthetic_p, gen_two_group, gen_uniform
from .lowerbound import optimal_coin_error, optimal_coin_log_error

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_CONFIG_KEYS = {
    "instance": str, "n": int, "k": int, "p": float, "epsilon": float,
    "delta": float, "budgets": str, "trials": int, "seed": int,
    "algos": str, "out": str, "workers": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_seed() -> int:
    raw = os.environ.get("TOPK_BANDIT_SEED")
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(f"TOPK_BANDIT_SEED is not an integer: {raw!r}") from exc
    return 0


def _add_instance_flags(p, need_k=True):
    p.add_argument("--instance", required=True,
                   help="two-group | uniform | synthetic | path to a mean file")
    p.add_argument("--n", type=int, default=1000, help="number of arms for generators")
    if need_k:
        p.add_argument("--k", type=int, required=True, help="number of arms to select")
    p.add_argument("--p", type=float, default=1.0, help="shape exponent for synthetic")


def _parse_config_file(path: str) -> dict:
    """Flat key = value file; '#' starts a comment; keys match CLI flags."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _CONFIG_KEYS[key](val)
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="topk-bandit", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hardness", help="instance difficulty report as JSON")
    _add_instance_flags(p)
    p.add_argument("--epsilon", type=float, default=0.01)

    p = sub.add_parser("gen", help="write a generated mean vector to a file")
    _add_instance_flags(p)
    p.add_argument("--out", required=True, help="output path")

    p = sub.add_parser("run", help="single algorithm run as JSON")
    _add_instance_flags(p)
    p.add_argument("--algo", required=True, choices=sorted(ALGORITHMS))
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--budget", type=int, default=None,
                   help="pull budget (required by fixed-budget algorithms)")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("experiment", help="budget-grid experiment to CSV")
    p.add_argument("--config", default=None, help="flat key=value config file")
    _add_instance_flags(p)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--budgets", default="auto",
                   help="comma-separated budgets, or 'auto' for a difficulty-scaled grid")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--algo", action="append", choices=sorted(ALGORITHMS),
                   help="repeatable; default adaptive-fb")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--json-out", default=None, help="optional JSON mirror path")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("lowerbound", help="exact coin-distinguishing error CSV")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--m", default="100,200,400,800,1600",
                   help="comma-separated toss counts")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def _gen_means(args) -> np.ndarray:
    if args.instance == "two-group":
        return gen_two_group(args.n, args.k)
    if args.instance == "uniform":
        return gen_uniform(args.n)
    if args.instance == "synthetic":
        return gen_synthetic_p(args.n, args.k, args.p)
    raise ValueError(f"gen requires a generator name, got {args.instance!r}")


def _cmd_hardness(args) -> int:
    cfg = ExperimentConfig(instance=args.instance, k=args.k, n=args.n, p=args.p,
                           epsilon=args.epsilon, budgets=(1,))
    means = resolve_means(cfg)
    sorted_means = np.sort(means)[::-1]
    report = hardness(sorted_means, args.k, args.epsilon)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _cmd_gen(args) -> int:
    means = _gen_means(args)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# {args.instance} n={args.n} k={args.k} p={args.p}\n")
        for v in means:
            fh.write(f"{float(v)!r}\n")
    return EXIT_OK


def _cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = ExperimentConfig(instance=args.instance, k=args.k, n=args.n, p=args.p,
                           epsilon=args.epsilon, delta=args.delta, budgets=(1,))
    means = resolve_means(cfg)
    if not 1 <= args.k < means.size:
        raise ValueError(f"need 1 <= K < n; got K={args.k}, n={means.size}")
    if args.algo in ("adaptive-fb", "uniform", "cb-ar") and args.budget is None:
        raise ValueError(f"--budget is required for {args.algo}")
    budget = args.budget if args.budget is not None else 0
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5F)))
    perm = rng.permutation(means.size)
    shuffled = means[perm]
    env = ArmEnvironment(Instance(shuffled, args.k, args.epsilon, args.delta),
                         seed=np.random.SeedSequence((seed, 0xE)))
    selected = sorted(ALGORITHMS[args.algo](env, args.k, args.epsilon, args.delta, budget))
    order = np.argsort(-shuffled, kind="stable")
    rank_of = np.empty(means.size, dtype=np.intp)
    rank_of[order] = np.arange(means.size)
    regret = aggregate_regret(shuffled[order], args.k, rank_of[selected])
    print(json.dumps({
        "algorithm": args.algo,
        "selected": [int(a) for a in selected],
        "total_pulls": env.total_pulls(),
        "regret": regret,
        "success": regret <= args.epsilon,
        "seed": seed,
    }, indent=2))
    return EXIT_OK


def _cmd_experiment(args, argv) -> int:
    if args.config:
        # Command-line flags win over config-file values.
        present = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
        for key, val in _parse_config_file(args.config).items():
            if key == "algos":
                if not args.algo:
                    args.algo = [a.strip() for a in val.split(",")]
            elif f"--{key}" not in present:
                setattr(args, key, val)
    seed = args.seed if args.seed is not None else _default_seed()
    algos = tuple(args.algo) if args.algo else ("adaptive-fb",)
    probe = ExperimentConfig(instance=args.instance, k=args.k, n=args.n, p=args.p,
                             epsilon=args.epsilon, delta=args.delta, budgets=(1,))
    means = resolve_means(probe)
    if not 1 <= args.k < means.size:
        raise ValueError(f"need 1 <= K < n; got K={args.k}, n={means.size}")
    if args.budgets == "auto":
        budgets = default_budget_grid(means, args.k, args.epsilon)
    else:
        budgets = [int(b) for b in str(args.budgets).split(",") if b.strip()]
    config = ExperimentConfig(
        instance=args.instance, k=args.k, n=args.n, p=args.p,
        epsilon=args.epsilon, delta=args.delta, algorithms=algos,
        budgets=tuple(budgets), trials=args.trials, base_seed=seed,
        workers=args.workers,
    )
    report = run_experiment(config)
    csv_text = report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    return EXIT_OK


def _cmd_lowerbound(args) -> int:
    ms = [int(m) for m in str(args.m).split(",") if m.strip()]
    if not ms:
        raise ValueError("--m must list at least one toss count")
    lines = ["m,error,log_error"]
    for m in ms:
        lines.append(f"{m},{optimal_coin_error(m, args.eta)!r},{optimal_coin_log_error(m, args.eta)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "hardness": _cmd_hardness,
    "gen": _cmd_gen,
    "run": _cmd_run,
    "lowerbound": _cmd_lowerbound,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        if args.command == "experiment":
            return _cmd_experiment(args, list(argv))
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
