"""Independent recomputation of termination and infeasibility conditions.

These functions work from raw unscaled problem data only; the solver's own
accumulators never enter. They are used by tests to certify solver output
and are part of the public API.
"""

from __future__ import annotations

import numpy as np


def residuals(problem, x, y, sigma_unscaled=None):
    """Unscaled stationarity and feasibility residual norms at (x, y).

    ``sigma_unscaled`` holds the positive penalty diagonal defining the
    projection argument Ax + y/sigma; by default a unit diagonal is used.
    Returns (dual_res, prim_res, rel_dual, rel_prim) where the rel terms are
    the max-based relative scales of the termination test.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if sigma_unscaled is None:
        sigma_unscaled = np.ones(problem.m)
    qx = problem.Q.matvec(x)
    aty = problem.A.rmatvec(y)
    ax = problem.A.matvec(x)
    z = np.clip(ax + y / sigma_unscaled, problem.l, problem.u)
    dual = qx + problem.q + aty
    prim = ax - z

    def mx(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    rel_dual = max(mx(qx), mx(problem.q), mx(aty))
    rel_prim = max(mx(ax), mx(z))
    return mx(dual), mx(prim), rel_dual, rel_prim


def verify_termination(problem, x, y, eps_abs, eps_rel, sigma_unscaled=None) -> bool:
    """Check the primal-dual stopping pair on unscaled data from scratch."""
    dual, prim, rel_dual, rel_prim = residuals(problem, x, y, sigma_unscaled)
    return (dual <= eps_abs + eps_rel * rel_dual
            and prim <= eps_abs + eps_rel * rel_prim)


def verify_primal_infeasibility(problem, dy, eps_pinf) -> bool:
    """Farkas-type certificate check for an empty feasible set.

    Requires ||A'dy||_inf <= eps ||dy||_inf and
    u'[dy]_+ - l'[-dy]_+ <= -eps ||dy||_inf, where terms pairing an
    infinite bound with a zero multiplier contribute zero.
    """
    dy = np.asarray(dy, dtype=np.float64)
    norm = float(np.max(np.abs(dy))) if dy.size else 0.0
    if norm == 0.0:
        return False
    aty = problem.A.rmatvec(dy)
    if float(np.max(np.abs(aty))) > eps_pinf * norm:
        return False
    pos = np.maximum(dy, 0.0)
    neg = np.maximum(-dy, 0.0)
    if np.any(np.isinf(problem.u) & (pos > 0)) or np.any(np.isinf(problem.l) & (neg > 0)):
        return False
    up = pos > 0
    lo = neg > 0
    gap = float(problem.u[up] @ pos[up]) - float(problem.l[lo] @ neg[lo])
    return gap <= -eps_pinf * norm


def verify_dual_infeasibility(problem, dx, eps_dinf, nonconvex=False) -> bool:
    """Certificate check for an unbounded descent direction.

    The direction must be asymptotically feasible row-wise, and either have
    vanishing curvature with negative slope (convex case) or negative
    curvature (nonconvex case).
    """
    dx = np.asarray(dx, dtype=np.float64)
    norm = float(np.max(np.abs(dx))) if dx.size else 0.0
    if norm == 0.0:
        return False
    adx = problem.A.matvec(dx)
    tol = eps_dinf * norm
    finite_u = np.isfinite(problem.u)
    finite_l = np.isfinite(problem.l)
    if np.any(adx[finite_u] > tol) or np.any(adx[finite_l] < -tol):
        return False
    qdx = problem.Q.matvec(dx)
    convex_ok = (float(np.max(np.abs(qdx))) <= tol
                 and float(problem.q @ dx) <= -tol)
    if convex_ok:
        return True
    if nonconvex:
        return float(dx @ qdx) <= -eps_dinf ** 2 * float(dx @ dx)
    return False
