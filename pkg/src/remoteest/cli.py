"""Command-line front end: solve, simulate, sweep, check.

Exit codes: 0 success, 1 usage or parse failure, 2 solver
non-convergence, 3 validation-check failure. The seed is taken from
--seed, falling back to the REMOTEEST_SEED environment variable, then
0. Output is key=value lines for single commands and CSV for sweeps.
"""

import argparse
import math
import os
import sys

from . import __version__
from .checks import format_report, run_suite
from .service import ServiceDistribution, format_service, mean, parse_service
from .simulate import (
    AgeThreshold,
    Periodic,
    SignalThreshold,
    SimConfig,
    ZeroWait,
    simulate_policy,
)
from .solver import ConvergenceError, solve_age_threshold, solve_signal_threshold
from .sweeps import run_sweep, write_sweep_csv

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage, which collides with the
    # non-convergence code; route usage failures to exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_fmax(token: str) -> float:
    if token.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(token)
    except ValueError:
        raise _UsageError(f"bad fmax {token!r}: expected a positive number or 'inf'")
    if math.isnan(value) or value <= 0.0:
        raise _UsageError(f"bad fmax {token!r}: expected a positive number or 'inf'")
    return value


def _parse_dist(token: str) -> ServiceDistribution:
    try:
        return parse_service(token)
    except ValueError as exc:
        raise _UsageError(str(exc))


def _resolve_seed(arg_seed: int | None) -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get("REMOTEEST_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"bad REMOTEEST_SEED {env!r}: expected an integer")


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _cmd_solve(args) -> int:
    dist = _parse_dist(args.dist)
    fmax = _parse_fmax(args.fmax)
    solve = solve_signal_threshold if args.policy == "signal" else solve_age_threshold
    sol = solve(dist, fmax)
    print(f"policy={args.policy}")
    print(f"dist={format_service(dist)}")
    print(f"fmax={_fmt(fmax)}")
    print(f"beta={_fmt(sol.beta)}")
    print(f"mse={_fmt(sol.mse)}")
    print(f"expected_interval={_fmt(sol.expected_interval)}")
    print(f"rate_constraint_binding={str(sol.rate_constraint_binding).lower()}")
    return 0


def _parse_policy(token: str, dist: ServiceDistribution, fmax: float | None):
    name, sep, param = token.partition(":")
    if name == "zero-wait":
        if sep:
            raise _UsageError(f"bad policy {token!r}: zero-wait takes no parameter")
        if fmax is not None and math.isfinite(fmax) and fmax < 1.0 / mean(dist):
            raise _UsageError(
                f"zero-wait is infeasible at fmax={fmax:g}: its sampling rate "
                f"1/E[Y]={1.0 / mean(dist):g} exceeds the cap")
        return ZeroWait()
    if not sep or not param:
        raise _UsageError(f"bad policy {token!r}: expected periodic:<interval>, "
                          "zero-wait, age-threshold:<beta|auto>, or "
                          "signal-threshold:<beta|auto>")
    if name == "periodic":
        try:
            return Periodic(float(param))
        except ValueError:
            raise _UsageError(f"bad policy parameter {param!r} in {token!r}")
    if name in ("age-threshold", "signal-threshold"):
        if param == "auto":
            if fmax is None:
                raise _UsageError(f"policy {token!r} requires --fmax to resolve 'auto'")
            solve = (solve_signal_threshold if name == "signal-threshold"
                     else solve_age_threshold)
            beta = solve(dist, fmax).beta
        else:
            try:
                beta = float(param)
            except ValueError:
                raise _UsageError(f"bad policy parameter {param!r} in {token!r}")
        cls = SignalThreshold if name == "signal-threshold" else AgeThreshold
        try:
            return cls(beta)
        except ValueError as exc:
            raise _UsageError(f"bad policy {token!r}: {exc}")
    raise _UsageError(f"unknown policy {name!r}")


def _policy_token(policy) -> str:
    if isinstance(policy, Periodic):
        return f"periodic:{policy.interval:.10g}"
    if isinstance(policy, ZeroWait):
        return "zero-wait"
    if isinstance(policy, AgeThreshold):
        return f"age-threshold:{policy.beta:.10g}"
    return f"signal-threshold:{policy.beta:.10g}"


def _cmd_simulate(args) -> int:
    dist = _parse_dist(args.dist)
    fmax = _parse_fmax(args.fmax) if args.fmax is not None else None
    policy = _parse_policy(args.policy, dist, fmax)
    seed = _resolve_seed(args.seed)
    try:
        cfg = SimConfig(horizon=args.horizon, dt=args.dt, seed=seed,
                        replications=args.reps, warmup=args.warmup)
    except ValueError as exc:
        raise _UsageError(str(exc))
    res = simulate_policy(policy, dist, cfg)
    print(f"policy={_policy_token(policy)}")
    print(f"dist={format_service(dist)}")
    print(f"seed={seed}")
    print(f"mse={_fmt(res.mse)}")
    print(f"se_mse={_fmt(res.se_mse)}")
    print(f"avg_age={_fmt(res.avg_age)}")
    print(f"sampling_rate={_fmt(res.sampling_rate)}")
    print(f"n_samples={res.n_samples}")
    print(f"mean_interval={_fmt(res.mean_interval)}")
    print(f"fourth_moment_increment={_fmt(res.fourth_moment_increment)}")
    print(f"flags={';'.join(res.flags)}")
    return 0


def _cmd_sweep(args) -> int:
    seed = _resolve_seed(args.seed)
    grid = None
    if args.grid is not None:
        try:
            grid = tuple(float(tok) for tok in args.grid.split(",") if tok)
        except ValueError:
            raise _UsageError(f"bad grid {args.grid!r}: expected comma-separated numbers")
    try:
        rows = run_sweep(args.figure, seed=seed, horizon=args.horizon, dt=args.dt,
                         replications=args.reps, grid=grid)
    except ValueError as exc:
        raise _UsageError(str(exc))
    try:
        write_sweep_csv(rows, args.out, figure=args.figure, seed=seed,
                        horizon=args.horizon, dt=args.dt, replications=args.reps)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} rows={len(rows)}")
    return 0


def _cmd_check(args) -> int:
    seed = _resolve_seed(args.seed)
    try:
        reports = run_suite(args.suite, seed=seed)
    except ValueError as exc:
        raise _UsageError(str(exc))
    failed = 0
    for report in reports:
        print(format_report(report))
        if not report.passed:
            failed += 1
    print(f"checks passed={len(reports) - failed} failed={failed}")
    return 3 if failed else 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="remoteest",
                     description="Threshold solver and policy simulator for "
                                 "sampling a Wiener source over a random-delay "
                                 "channel.")
    parser.add_argument("--version", action="version",
                        version=f"remoteest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="solve one optimal threshold")
    p_solve.add_argument("--dist", required=True,
                         help="service law: det:<d>, exp:<mean>, "
                              "lognormal:<sigma>, discrete:v1,p1;v2,p2;...")
    p_solve.add_argument("--fmax", required=True,
                         help="sampling rate cap (positive number or 'inf')")
    p_solve.add_argument("--policy", required=True, choices=("signal", "age"))
    p_solve.set_defaults(func=_cmd_solve)

    p_sim = sub.add_parser("simulate", help="simulate one policy")
    p_sim.add_argument("--dist", required=True)
    p_sim.add_argument("--policy", required=True,
                       help="periodic:<interval>, zero-wait, "
                            "age-threshold:<beta|auto>, signal-threshold:<beta|auto>")
    p_sim.add_argument("--fmax", default=None,
                       help="rate cap; required to resolve 'auto' thresholds")
    p_sim.add_argument("--horizon", type=float, default=2e4)
    p_sim.add_argument("--dt", type=float, default=1e-3)
    p_sim.add_argument("--reps", type=int, default=8)
    p_sim.add_argument("--warmup", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a stock sweep to CSV")
    p_sweep.add_argument("--figure", type=int, required=True, choices=(1, 2, 3))
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--horizon", type=float, default=2e4)
    p_sweep.add_argument("--dt", type=float, default=1e-3)
    p_sweep.add_argument("--reps", type=int, default=8)
    p_sweep.add_argument("--grid", default=None,
                         help="override x grid, comma-separated")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_check = sub.add_parser("check", help="run the validation suites")
    p_check.add_argument("--suite", default="all",
                         choices=("identities", "solver", "ordering", "all"))
    p_check.add_argument("--seed", type=int, default=None)
    p_check.set_defaults(func=_cmd_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"error: solver failed to converge: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
