"""Command-line interface: ``timealloc {oracle,run,sweep}``."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .env import ConfigurationError
from .harness import emit_decision_map, regret, simulate, sweep
from .oracle import solve_c_star, solve_value_function
from .policies import ALGORITHMS, make_policy


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    sol = solve_value_function(cfg.env, args.T, args.dt)
    lower, upper = sol.sandwich_residuals()
    w0 = float(sol.w(0.0))
    print("c_star,v0,w0,lower_residual,upper_residual")
    print(f"{sol.c_star!r},{float(sol.v[0])!r},{w0!r},{lower!r},{upper!r}")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    c_star = solve_c_star(cfg.env)
    policy = make_policy(args.algo, cfg.env, args.T, cfg.params(args.algo))
    traj = simulate(cfg.env, policy, args.T, args.seed)
    print("algo,T,seed,regret,reward,theta,elapsed,gap_regret")
    print(",".join(str(v) for v in (args.algo, args.T, args.seed,
                                   repr(regret(c_star, args.T, traj.total_reward)),
                                   repr(traj.total_reward), traj.theta, repr(traj.elapsed),
                                   repr(traj.gap_regret(c_star)))))
    if args.emit_decisions:
        for p in emit_decision_map(traj, cfg.env, c_star, args.emit_decisions):
            print(f"wrote {p}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)

    def progress(done, total, secs):
        if args.verbose:
            print(f"\r{done}/{total} runs, {secs:.0f}s", end="", file=sys.stderr, flush=True)

    _, rows = sweep(cfg, args.out, workers=args.workers, progress=progress)
    if args.verbose:
        print(file=sys.stderr)
    for r in rows:
        print(f"{r[0]:>10s} T={r[1]:<10g} regret={r[2]:10.2f} +- {r[3]:.2f}  gap={r[5]:10.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="timealloc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="threshold, value function and sandwich residuals")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", help="simulate one policy on one seed")
    p.add_argument("--config", required=True)
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-decisions", metavar="PATH")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over horizons and algorithms")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, OSError) as exc:
        print(f"timealloc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
