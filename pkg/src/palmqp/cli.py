"""Command-line front end: solve problem files, run benchmarks, crunch stats."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import generators, qpfile, stats
from .problem import ANSWER_STATUSES, Settings
from .solver import solve

TIME_LIMIT_ENV = "PALMQP_TIME_LIMIT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_settings_flags(p):
    p.add_argument("--eps-abs", type=float, dest="eps_abs")
    p.add_argument("--eps-rel", type=float, dest="eps_rel")
    p.add_argument("--delta-abs0", type=float, dest="delta_abs0")
    p.add_argument("--delta-rel0", type=float, dest="delta_rel0")
    p.add_argument("--rho", type=float, dest="rho")
    p.add_argument("--theta", type=float, dest="theta")
    p.add_argument("--delta", type=float, dest="delta")
    p.add_argument("--sigma-init", type=float, dest="sigma_init")
    p.add_argument("--sigma-max", type=float, dest="sigma_max")
    p.add_argument("--gamma-init", type=float, dest="gamma_init")
    p.add_argument("--gamma-upd", type=float, dest="gamma_upd")
    p.add_argument("--gamma-max", type=float, dest="gamma_max")
    p.add_argument("--scaling", type=int, dest="scaling_iters")
    p.add_argument("--eps-pinf", type=float, dest="eps_pinf")
    p.add_argument("--eps-dinf", type=float, dest="eps_dinf")
    p.add_argument("--max-rank-update", type=int, dest="max_rank_update")
    p.add_argument("--max-rank-update-fraction", type=float,
                   dest="max_rank_update_fraction")
    p.add_argument("--nonconvex", action="store_true", dest="nonconvex", default=None)
    p.add_argument("--linsys", choices=["auto", "kkt", "schur"], dest="linsys")
    p.add_argument("--max-iter", type=int, dest="max_outer_iter")
    p.add_argument("--max-newton-iter", type=int, dest="max_total_newton_iter")
    p.add_argument("--inner-max-iter", type=int, dest="inner_max_iter")
    p.add_argument("--time-limit", type=float, dest="time_limit_seconds")
    p.add_argument("--no-warm-start", action="store_false", dest="warm_start",
                   default=None)


def _settings_from_args(args) -> Settings:
    s = Settings()
    overrides = {}
    for name in ("eps_abs", "eps_rel", "delta_abs0", "delta_rel0", "rho", "theta",
                 "delta", "sigma_init", "sigma_max", "gamma_init", "gamma_upd",
                 "gamma_max", "scaling_iters", "eps_pinf", "eps_dinf",
                 "max_rank_update", "max_rank_update_fraction", "nonconvex",
                 "linsys", "max_outer_iter", "max_total_newton_iter",
                 "inner_max_iter", "time_limit_seconds", "warm_start"):
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if "time_limit_seconds" not in overrides and os.environ.get(TIME_LIMIT_ENV):
        overrides["time_limit_seconds"] = float(os.environ[TIME_LIMIT_ENV])
    return s.replace(**overrides)


def _parse_range(spec, step):
    if ".." in spec:
        lo, hi = spec.split("..")
        return list(range(int(lo), int(hi) + 1, step))
    return [int(spec)]


def _emit(text, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    try:
        problem, warm_inline = qpfile.read_problem(args.file)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    warm = warm_inline
    if args.warm_start_file:
        try:
            doc = qpfile.read_result(args.warm_start_file)
            warm = (doc["x"], doc["y"])
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: bad warm start file: {exc}", file=sys.stderr)
            return 1
    settings = _settings_from_args(args)
    result = solve(problem, settings, warm=warm)
    qpfile.write_result(result, sys.stdout)
    return 0 if result.status in ANSWER_STATUSES else 2


def _run_case(name, problem, settings, warm=None):
    result = solve(problem, settings, warm=warm)
    runtime = result.info.sgm_runtime
    return stats.BenchRecord(name, "palmqp", runtime, result.status.value,
                             result.objective, result.prim_res, result.dual_res), result


def _cmd_bench(args) -> int:
    settings = _settings_from_args(args)
    records = []
    if args.kind == "portfolio":
        sizes = _parse_range(args.n, args.step)
        betas = [1e-2, 1e-1, 1.0, 1e1, 1e2] if args.beta_sweep else [args.beta]
        for n in sizes:
            times = []
            last = None
            for b in betas:
                problem = generators.gen_portfolio(n, seed=args.seed, beta=b)
                rec, _ = _run_case(f"portfolio_n{n}_beta{b}", problem, settings)
                times.append(rec.runtime)
                last = rec
            # One record per size; with a sweep this carries the
            # arithmetic-mean runtime over the beta values.
            records.append(stats.BenchRecord(
                f"portfolio_n{n}", "palmqp", float(np.mean(times)),
                last.status, last.objective, last.prim_res, last.dual_res))
    elif args.kind == "mpc":
        horizons = _parse_range(args.horizon, args.hstep)
        for N in horizons:
            problem, data = generators.gen_mpc(args.nx, args.nu, N, seed=args.seed)
            rec, result = _run_case(f"mpc_N{N}", problem, settings)
            records.append(rec)
            if args.sequential and N == horizons[-1]:
                records += _sequential_mpc(problem, data, settings, args.sequential,
                                           args.seed)
    elif args.kind == "random":
        sizes = _parse_range(args.n, args.step)
        for n in sizes:
            for i in range(args.count):
                problem = generators.gen_random_qp(
                    n, args.m if args.m else n, args.density,
                    convex=not args.nonconvex_set, seed=args.seed + 1000 * i + n)
                rec, _ = _run_case(f"random_n{n}_{i}", problem, settings)
                records.append(rec)
    _emit(stats.records_to_csv(records), args.output)
    return 0


def _sequential_mpc(problem, data, settings, count, seed):
    """Warm vs cold re-solves of a disturbed receding-horizon sequence."""
    rng = np.random.default_rng(seed + 999)
    records = []
    state = data["x_init"]
    prev = solve(problem, settings)
    for step in range(count):
        nu0 = data["nu"]
        u0 = prev.x[data["nx"]:data["nx"] + nu0]
        state = data["A"] @ state + data["B"] @ u0 + rng.normal(0.0, 0.01, data["nx"])
        problem = generators.mpc_set_initial_state(problem, data, state)
        warm = generators.shift_warm_start(data, prev.x, prev.y)
        t0 = time.perf_counter()
        warm_res = solve(problem, settings, warm=warm)
        warm_t = time.perf_counter() - t0
        t0 = time.perf_counter()
        cold_res = solve(problem, settings)
        cold_t = time.perf_counter() - t0
        records.append(stats.BenchRecord(f"mpc_seq{step}", "palmqp_warm", warm_t,
                                         warm_res.status.value, warm_res.objective,
                                         warm_res.prim_res, warm_res.dual_res))
        records.append(stats.BenchRecord(f"mpc_seq{step}", "palmqp_cold", cold_t,
                                         cold_res.status.value, cold_res.objective,
                                         cold_res.prim_res, cold_res.dual_res))
        prev = warm_res if warm_res.solved else cold_res
    return records


def _cmd_stats(args) -> int:
    try:
        with open(args.records) as fh:
            records = stats.records_from_csv(fh.read())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.what == "sgm":
        table = stats.sgm_by_solver(records, shift=args.shift,
                                    time_limit=args.time_limit)
        lines = ["solver,sgm"] + [f"{s},{v!r}" for s, v in table.items()]
        _emit("\n".join(lines) + "\n", args.output)
    else:
        prof = stats.performance_profile(records)
        _emit(stats.profile_to_csv(prof), args.output)
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="palmqp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve a problem file")
    ps.add_argument("file")
    ps.add_argument("--warm-start", dest="warm_start_file", default=None,
                    help="result document supplying the starting point")
    _add_settings_flags(ps)
    ps.set_defaults(func=_cmd_solve)

    pb = sub.add_parser("bench", help="run benchmark presets")
    pb.add_argument("kind", choices=["portfolio", "mpc", "random"])
    pb.add_argument("--n", default="100..500")
    pb.add_argument("--m", type=int, default=0)
    pb.add_argument("--step", type=int, default=100)
    pb.add_argument("--horizon", default="5..30")
    pb.add_argument("--hstep", type=int, default=5)
    pb.add_argument("--nx", type=int, default=10)
    pb.add_argument("--nu", type=int, default=5)
    pb.add_argument("--beta", type=float, default=1.0)
    pb.add_argument("--beta-sweep", action="store_true")
    pb.add_argument("--sequential", type=int, default=0)
    pb.add_argument("--count", type=int, default=1)
    pb.add_argument("--density", type=float, default=0.5)
    pb.add_argument("--nonconvex-set", action="store_true",
                    help="generate indefinite objectives")
    pb.add_argument("--seed", type=int, default=42)
    pb.add_argument("--output", default=None)
    _add_settings_flags(pb)
    pb.set_defaults(func=_cmd_bench)

    pt = sub.add_parser("stats", help="benchmark statistics")
    pt.add_argument("what", choices=["sgm", "profile"])
    pt.add_argument("records")
    pt.add_argument("--shift", type=float, default=1.0)
    pt.add_argument("--time-limit", type=float, default=None, dest="time_limit")
    pt.add_argument("--output", default=None)
    pt.set_defaults(func=_cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
