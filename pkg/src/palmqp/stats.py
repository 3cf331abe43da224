"""Benchmark statistics: shifted geometric means and performance profiles."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


@dataclass
class BenchRecord:
    problem: str
    solver: str
    runtime: float
    status: str
    objective: float = math.nan
    prim_res: float = math.nan
    dual_res: float = math.nan

    @property
    def succeeded(self) -> bool:
        return self.status in ("solved", "primal_infeasible", "dual_infeasible")


def sgm(times, shift=1.0) -> float:
    """Shifted geometric mean exp(mean(ln(t + shift))) - shift, in log space."""
    times = list(times)
    if not times:
        raise ValueError("sgm of an empty sequence")
    if shift <= 0:
        raise ValueError("shift must be positive")
    if any(t < 0 for t in times):
        raise ValueError("runtimes must be nonnegative")
    return math.exp(sum(math.log(t + shift) for t in times) / len(times)) - shift


def sgm_by_solver(records, shift=1.0, time_limit=None):
    """Per-solver sgm with failures accounted at the time limit."""
    by = {}
    for r in records:
        t = r.runtime
        if not r.succeeded and time_limit is not None:
            t = time_limit
        by.setdefault(r.solver, []).append(t)
    return {s: sgm(ts, shift) for s, ts in sorted(by.items())}


def performance_profile(records):
    """Step functions q_s(f): fraction of problems solved within factor f.

    Ratios use the best successful runtime per problem; a failed run gets an
    infinite ratio and plateaus the profile below one. Problems no solver
    solved are excluded with a warning. Returns {solver: [(f, q), ...]} with
    breakpoints sorted by f.
    """
    solvers = sorted({r.solver for r in records})
    problems = sorted({r.problem for r in records})
    table = {}
    for r in records:
        key = (r.solver, r.problem)
        if key in table:
            raise ValueError(f"duplicate record for {key}")
        table[key] = r
    for s in solvers:
        for p in problems:
            if (s, p) not in table:
                raise ValueError(f"missing record for solver {s!r} on problem {p!r}")

    ratios = {s: [] for s in solvers}
    kept = 0
    for p in problems:
        best = min((table[(s, p)].runtime for s in solvers
                    if table[(s, p)].succeeded), default=None)
        if best is None:
            warnings.warn(f"problem {p!r} solved by no solver; excluded from profile")
            continue
        kept += 1
        for s in solvers:
            rec = table[(s, p)]
            if rec.succeeded:
                ratios[s].append(rec.runtime / best if best > 0 else 1.0)
            else:
                ratios[s].append(math.inf)

    profile = {}
    for s in solvers:
        rs = sorted(ratios[s])
        pts = []
        count = 0
        for f in rs:
            if math.isinf(f):
                break
            count += 1
            q = count / kept
            if pts and pts[-1][0] == f:
                pts[-1] = (f, q)
            else:
                pts.append((f, q))
        profile[s] = pts
    return profile


def records_to_csv(records) -> str:
    lines = ["problem,solver,runtime,status,objective,prim_res,dual_res"]
    for r in records:
        lines.append(f"{r.problem},{r.solver},{r.runtime!r},{r.status},"
                     f"{r.objective!r},{r.prim_res!r},{r.dual_res!r}")
    return "\n".join(lines) + "\n"


def records_from_csv(text) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("problem,solver"):
        raise ValueError("not a benchmark record table")
    out = []
    for ln in lines[1:]:
        prob, solver, runtime, status, obj, pres, dres = ln.split(",")
        out.append(BenchRecord(prob, solver, float(runtime), status,
                               float(obj), float(pres), float(dres)))
    return out


def profile_to_csv(profile) -> str:
    lines = ["solver,f,q"]
    for s, pts in sorted(profile.items()):
        for f, q in pts:
            lines.append(f"{s},{f!r},{q!r}")
    return "\n".join(lines) + "\n"
