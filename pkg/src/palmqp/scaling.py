"""Constraint-matrix equilibration and problem scaling.

The constraint matrix is equilibrated by iterated row/column scaling with
square roots of infinity norms; the objective is scaled by the single
constant c = 1/max(1, ||D(Q x0 + q)||_inf). The scaled problem reads

    minimize 0.5 xb' Qb xb + qb' xb  s.t.  Ab xb in [lb, ub]

with xb = D^-1 x, yb = c E^-1 y, Qb = c D Q D, qb = c D q, Ab = E A D,
lb = E l, ub = E u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sparse import SparseMatrix


@dataclass
class ScalingData:
    d: np.ndarray        # column scaling, size n
    e: np.ndarray        # row scaling, size m
    c: float             # objective scaling
    dinv: np.ndarray = field(init=False)
    einv: np.ndarray = field(init=False)
    cinv: float = field(init=False)

    def __post_init__(self):
        if np.any(self.d <= 0) or np.any(self.e <= 0) or self.c <= 0:
            raise ValueError("scaling factors must be strictly positive")
        if not (np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.e))
                and np.isfinite(self.c)):
            raise ValueError("scaling factors must be finite")
        self.dinv = 1.0 / self.d
        self.einv = 1.0 / self.e
        self.cinv = 1.0 / self.c

    @classmethod
    def identity(cls, n, m):
        return cls(np.ones(n), np.ones(m), 1.0)


def _scaled_csc(a_csc, e, d):
    return sp.diags(e) @ a_csc @ sp.diags(d)


def ruiz_equilibrate(a, iters):
    """Equilibrate ``a`` by ``iters`` sweeps; returns (d, e, a_scaled).

    Each sweep computes row factors sqrt(row inf-norm) and column factors
    sqrt(column inf-norm) from the same pre-sweep matrix, then applies both.
    Zero rows/columns keep factor 1. The returned matrix is recomputed as
    E A D from the originals so the relation holds exactly.
    """
    if iters < 0:
        raise ValueError("iteration count must be nonnegative")
    a_csc = a.to_scipy() if isinstance(a, SparseMatrix) else sp.csc_matrix(a)
    m, n = a_csc.shape
    d = np.ones(n)
    e = np.ones(m)
    abar = a_csc.copy()
    if m == 0 or n == 0:
        iters = 0
    for _ in range(iters):
        absbar = abs(abar)
        rmax = np.asarray(absbar.max(axis=1).todense()).ravel() if m else np.zeros(0)
        cmax = np.asarray(absbar.max(axis=0).todense()).ravel() if n else np.zeros(0)
        ebar = np.sqrt(np.where(rmax > 0, rmax, 1.0))
        dbar = np.sqrt(np.where(cmax > 0, cmax, 1.0))
        e /= ebar
        d /= dbar
        abar = _scaled_csc(a_csc, e, d)
    out = SparseMatrix.from_scipy(abar) if isinstance(a, SparseMatrix) else abar
    return d, e, out


def scale_problem(problem, x0=None, iters=10, ruiz=None):
    """Scaled copy of ``problem`` plus the :class:`ScalingData` used.

    ``x0`` (default zero) enters only the objective constant
    c = 1/max(1, ||D(Q x0 + q)||_inf). Passing ``ruiz=(d, e)`` reuses
    previously computed equilibration factors (re-solves with unchanged
    constraint values) and recomputes only c.
    """
    from .problem import QpProblem  # local to avoid a cycle

    n, m = problem.n, problem.m
    if x0 is None:
        x0 = np.zeros(n)
    x0 = np.asarray(x0, dtype=np.float64)
    if ruiz is not None:
        d, e = np.asarray(ruiz[0], dtype=np.float64), np.asarray(ruiz[1], dtype=np.float64)
        abar = SparseMatrix.from_scipy(_scaled_csc(problem.A.to_scipy(), e, d))
    else:
        d, e, abar = ruiz_equilibrate(problem.A, iters)
    grad0 = problem.Q.matvec(x0) + problem.q
    c = 1.0 / max(1.0, float(np.max(np.abs(d * grad0))) if n else 0.0)
    s = ScalingData(d, e, c)
    q_csc = problem.Q.to_scipy()
    qbar = SparseMatrix.from_scipy(
        sp.diags(d) @ (c * q_csc) @ sp.diags(d), symmetric=True)
    scaled = QpProblem(qbar, c * d * problem.q,
                       abar if isinstance(abar, SparseMatrix) else SparseMatrix.from_scipy(abar),
                       e * problem.l, e * problem.u)
    return scaled, s


def unscale_solution(xbar, ybar, s: ScalingData):
    """Map a scaled primal-dual pair back: x = D xb, y = (1/c) E yb."""
    xbar = np.asarray(xbar, dtype=np.float64)
    ybar = np.asarray(ybar, dtype=np.float64)
    if xbar.shape != s.d.shape or ybar.shape != s.e.shape:
        raise ValueError("dimension mismatch with scaling data")
    return s.d * xbar, s.cinv * s.e * ybar
