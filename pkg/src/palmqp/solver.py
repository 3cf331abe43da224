"""Outer proximal augmented Lagrangian loop with inner semismooth Newton solves.

One outer iteration inexactly minimizes the strongly convex regularized
augmented Lagrangian around the proximal center, then updates multipliers,
penalties and tolerances. Inner iterations take a semismooth Newton step
with an exact linesearch, reusing the factorized Newton system through
low-rank updates wherever the active set permits.
"""

from __future__ import annotations

import time

import numpy as np

from . import newton as nt
from .eigen import EigenError, gershgorin_lower_bound, min_eigenvalue
from .linesearch import build_derivative, exact_linesearch
from .problem import (ANSWER_STATUSES, QpProblem, Settings, SolveInfo,
                      SolveResult, SolveStatus)
from .scaling import ScalingData, scale_problem, unscale_solution

STAGNATION_TOL = 1e-16


def init_sigma(problem_scaled, x0, settings) -> np.ndarray:
    """Initial penalty diagonal, one common value for all constraints.

    The value balances the objective magnitude at the starting point
    against its constraint violation, clamped to [1e-4, 1e4].
    """
    p = problem_scaled
    x0 = np.asarray(x0, dtype=np.float64)
    ax = p.A.matvec(x0)
    z0 = np.clip(ax, p.l, p.u)
    obj = abs(0.5 * x0 @ p.Q.matvec(x0) + p.q @ x0)
    viol = 0.5 * float(np.sum((ax - z0) ** 2))
    val = settings.sigma_init * max(1.0, obj) / max(1.0, viol)
    val = min(max(val, 1e-4), 1e4)
    return np.full(p.m, val)


def update_sigma(sigma, resid_now, resid_prev, settings) -> np.ndarray:
    """Per-component penalty escalation driven by constraint violations.

    Components whose violation dropped by the factor theta keep their
    penalty; the rest grow proportionally to their share of the largest
    violation, by at most Delta, capped at sigma_max.
    """
    resid_now = np.abs(np.asarray(resid_now, dtype=np.float64))
    resid_prev = np.abs(np.asarray(resid_prev, dtype=np.float64))
    norm = float(resid_now.max()) if resid_now.size else 0.0
    if norm == 0.0:
        return sigma.copy()
    grow = resid_now >= settings.theta * resid_prev
    factor = np.ones_like(sigma)
    factor[grow] = np.minimum(settings.sigma_max / sigma[grow],
                              np.maximum(settings.delta * resid_now[grow] / norm, 1.0))
    return sigma * factor


def select_proximal(problem_scaled, settings) -> tuple[np.ndarray, float | None]:
    """Proximal diagonal Sx (returned as Sx^-1) plus the eigenvalue bound used.

    Convex mode keeps Sx^-1 = 1/gamma_init. Nonconvex mode computes a lower
    bound lam on the minimum eigenvalue of the scaled Q; when negative, the
    proximal weight is set so Sx^-1 = |lam| + 1e-6 dominates the negative
    curvature. An eigeniteration failure falls back to the Gershgorin bound.
    """
    n = problem_scaled.n
    if not settings.nonconvex:
        return np.full(n, 1.0 / settings.gamma_init), None
    try:
        est = min_eigenvalue(problem_scaled.Q, eps=settings.eigen_eps,
                             max_iter=settings.eigen_max_iter)
        lam = est.lambda_lb if est.converged else gershgorin_lower_bound(problem_scaled.Q)
    except (EigenError, ValueError):
        lam = gershgorin_lower_bound(problem_scaled.Q)
    if lam < 0:
        return np.full(n, abs(lam - 1e-6)), lam
    return np.full(n, 1.0 / settings.gamma_init), lam


class _Tolerances:
    def __init__(self, settings):
        self.eps_abs_k = settings.delta_abs0
        self.eps_rel_k = settings.delta_rel0
        self.delta_abs_k = settings.delta_abs0
        self.delta_rel_k = settings.delta_rel0
        self._s = settings

    def tighten_outer(self):
        self.eps_abs_k = max(self._s.rho * self.eps_abs_k, self._s.eps_abs)
        self.eps_rel_k = max(self._s.rho * self.eps_rel_k, self._s.eps_rel)

    def tighten_inner(self):
        self.delta_abs_k = max(self._s.rho * self.delta_abs_k, self._s.eps_abs)
        self.delta_rel_k = max(self._s.rho * self.delta_rel_k, self._s.eps_rel)


class _Residuals:
    """Unscaled residual norms recovered from scaled matvec pieces."""

    def __init__(self, scaling: ScalingData):
        self.s = scaling

    def dual(self, qx_b, q_b, aty_b):
        s = self.s
        full = s.cinv * s.dinv * (qx_b + q_b + aty_b)
        rel = max(_mx(s.cinv * s.dinv * qx_b), _mx(s.cinv * s.dinv * q_b),
                  _mx(s.cinv * s.dinv * aty_b))
        return _mx(full), rel

    def primal(self, ax_b, z_b):
        s = self.s
        full = s.einv * (ax_b - z_b)
        rel = max(_mx(s.einv * ax_b), _mx(s.einv * z_b))
        return _mx(full), rel


def _mx(v):
    return float(np.max(np.abs(v))) if v.size else 0.0


def check_termination(dual_res, dual_rel, prim_res, prim_rel, inner_res,
                      settings, tols) -> str:
    """'solved', 'inner_done' or 'none' from precomputed unscaled residuals."""
    if (dual_res <= settings.eps_abs + settings.eps_rel * dual_rel
            and prim_res <= settings.eps_abs + settings.eps_rel * prim_rel):
        return "solved"
    if inner_res <= tols.delta_abs_k + tols.delta_rel_k * dual_rel:
        return "inner_done"
    return "none"


def check_primal_infeasibility(dy_b, problem_scaled, scaling, settings):
    """Certificate test on the scaled multiplier increment dy_b.

    The weighted conditions are algebraically identical to the unscaled
    Farkas conditions on (1/c) E dy_b, which is the certificate returned.
    """
    s = scaling
    norm = _mx(s.e * dy_b)
    if norm == 0.0:
        return False, None
    aty = s.dinv * problem_scaled.A.rmatvec(dy_b)
    if _mx(aty) > settings.eps_pinf * norm:
        return False, None
    pos = np.maximum(dy_b, 0.0)
    neg = np.maximum(-dy_b, 0.0)
    ub, lb = problem_scaled.u, problem_scaled.l
    if np.any(np.isinf(ub) & (pos > 0)) or np.any(np.isinf(lb) & (neg > 0)):
        return False, None
    up = pos > 0
    lo = neg > 0
    gap = float(ub[up] @ pos[up]) - float(lb[lo] @ neg[lo])
    if gap <= -settings.eps_pinf * norm:
        return True, s.cinv * s.e * dy_b
    return False, None


def check_dual_infeasibility(dx_b, problem_scaled, scaling, settings):
    """Certificate test on the scaled primal increment dx_b.

    Row-wise asymptotic feasibility plus either the zero-curvature negative
    slope pair or, in nonconvex mode, negative curvature. The curvature
    test runs on the unscaled direction D dx_b so a reported certificate
    always passes the unscaled recomputation.
    """
    s = scaling
    dx_u = s.d * dx_b
    norm = _mx(dx_u)
    if norm == 0.0:
        return False, None
    tol = settings.eps_dinf * norm
    adx = s.einv * problem_scaled.A.matvec(dx_b)
    finite_u = np.isfinite(problem_scaled.u)
    finite_l = np.isfinite(problem_scaled.l)
    if np.any(adx[finite_u] > tol) or np.any(adx[finite_l] < -tol):
        return False, None
    qdx = s.cinv * s.dinv * problem_scaled.Q.matvec(dx_b)
    slope = s.cinv * float(problem_scaled.q @ dx_b)
    if _mx(qdx) <= tol and slope <= -tol:
        return True, dx_u
    if settings.nonconvex and float(dx_u @ qdx) <= -settings.eps_dinf ** 2 * float(dx_u @ dx_u):
        return True, dx_u
    return False, None


class Solver:
    """One solver instance owns one in-flight solve; instances are independent.

    Re-solves after ``update_q``/``update_bounds`` keep the constraint
    equilibration factors (the constraint matrix is unchanged) and recompute
    only the objective constant.
    """

    def __init__(self, problem: QpProblem, settings: Settings | None = None):
        self.problem = problem
        self.settings = settings if settings is not None else Settings()
        self._ruiz = None

    def update_q(self, q):
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.problem.n,):
            raise ValueError("q length mismatch")
        self.problem = QpProblem(self.problem.Q, q, self.problem.A,
                                 self.problem.l, self.problem.u)

    def update_bounds(self, l, u):
        self.problem = QpProblem(self.problem.Q, self.problem.q, self.problem.A,
                                 np.asarray(l, dtype=np.float64),
                                 np.asarray(u, dtype=np.float64))

    def solve(self, warm=None) -> SolveResult:
        result, self._ruiz = _run(self.problem, self.settings, warm,
                                  ruiz=self._ruiz, return_ruiz=True)
        return result


def solve(problem: QpProblem, settings: Settings | None = None, warm=None) -> SolveResult:
    return _run(problem, settings if settings is not None else Settings(), warm)


def _run(problem, settings, warm, ruiz=None, return_ruiz=False):
    t0 = time.perf_counter()
    n, m = problem.n, problem.m
    info = SolveInfo()
    counters = nt.Counters()

    if warm is not None and settings.warm_start:
        x0 = np.asarray(warm[0], dtype=np.float64).copy()
        y0 = np.asarray(warm[1], dtype=np.float64).copy()
        if x0.shape != (n,) or y0.shape != (m,):
            raise ValueError("warm start dimension mismatch")
    else:
        x0 = np.zeros(n)
        y0 = np.zeros(m)

    scaled, sc = scale_problem(problem, x0, settings.scaling_iters, ruiz=ruiz)
    res = _Residuals(sc)
    xb = sc.dinv * x0
    yb = sc.c * sc.einv * y0
    xhat = xb.copy()

    sigma = init_sigma(scaled, xb, settings)
    sigma_x_inv, _lam = select_proximal(scaled, settings)
    tols = _Tolerances(settings)
    dx_b = np.zeros(n)

    mode = None if settings.linsys == "auto" else settings.linsys
    if m == 0:
        mode = "schur"
    sysm = None
    ordering = None
    curvature_repaired = False
    ax0 = scaled.A.matvec(xb)
    prev_update_resid = ax0 - np.clip(ax0 + yb / sigma, scaled.l, scaled.u)
    stagnations = 0
    dual_stall_outer = 0
    best_dual_res = np.inf
    last_dual_res = np.inf

    def finish(status, xb, yb_out, dual_res, prim_res, cert=None):
        x, y = unscale_solution(xb, yb_out, sc)
        info.runtime = time.perf_counter() - t0
        lim = settings.time_limit_seconds
        failed = status not in ANSWER_STATUSES
        info.sgm_runtime = lim if (failed and lim is not None) else info.runtime
        info.factorizations = counters.factorizations
        info.rank_updates = counters.rank_updates
        info.newton_iterations = counters.newton_iterations
        info.linsys = sysm.mode if sysm is not None else (mode or "")
        info.sigma_unscaled = sc.cinv * sc.e * sigma * sc.e
        result = SolveResult(status, x, y, problem.objective(x),
                             prim_res, dual_res, cert, info)
        if return_ruiz:
            return result, (sc.d, sc.e)
        return result

    for outer in range(settings.max_outer_iter):
        active_prev = None
        for _nu in range(settings.inner_max_iter):
            ax_b = scaled.A.matvec(xb)
            zb = np.clip(ax_b + yb / sigma, scaled.l, scaled.u)
            dy_b = sigma * (ax_b - zb)
            ytrial = yb + dy_b

            qx_b = scaled.Q.matvec(xb)
            aty_b = scaled.A.rmatvec(ytrial)
            dual_res, dual_rel = res.dual(qx_b, scaled.q, aty_b)
            prim_res, prim_rel = res.primal(ax_b, zb)
            inner_vec = sc.cinv * sc.dinv * (qx_b + scaled.q + aty_b
                                             + sigma_x_inv * (xb - xhat))
            inner_res = _mx(inner_vec)

            last_dual_res = dual_res
            state = check_termination(dual_res, dual_rel, prim_res, prim_rel,
                                      inner_res, settings, tols)
            if state == "solved":
                return finish(SolveStatus.SOLVED, xb, ytrial, dual_res, prim_res)
            pinf, pcert = check_primal_infeasibility(dy_b, scaled, sc, settings)
            if pinf:
                return finish(SolveStatus.PRIMAL_INFEASIBLE, xb, ytrial,
                              dual_res, prim_res, cert=pcert)
            dinf, dcert = check_dual_infeasibility(dx_b, scaled, sc, settings)
            if dinf:
                return finish(SolveStatus.DUAL_INFEASIBLE, xb, ytrial,
                              dual_res, prim_res, cert=dcert)
            if state == "inner_done":
                break
            if (settings.time_limit_seconds is not None
                    and time.perf_counter() - t0 > settings.time_limit_seconds):
                return finish(SolveStatus.TIME_LIMIT, xb, ytrial, dual_res, prim_res)
            if counters.newton_iterations >= settings.max_total_newton_iter:
                return finish(SolveStatus.MAX_ITER, xb, ytrial, dual_res, prim_res)

            active = nt.detect_active_set(xb, yb, sigma, scaled.A, scaled.l,
                                          scaled.u, active_prev)
            active_prev = active
            sysm = nt.refresh_system(sysm, active, sigma, sigma_x_inv, scaled,
                                     settings, counters, mode=mode, ordering=ordering)
            ordering = sysm.ordering
            grad = qx_b + scaled.q + aty_b + sigma_x_inv * (xb - xhat)
            d = nt.newton_direction(sysm, grad)
            if float(grad @ d) >= 0.0 and _mx(grad) > 0.0:
                # Rounding destroyed descent: rebuild the factors once; a
                # persistent failure is a numerical stall.
                sysm = nt.refresh_system(sysm, active, sigma, sigma_x_inv, scaled,
                                         settings, counters, force_refactor=True)
                d = nt.newton_direction(sysm, grad)
                if float(grad @ d) >= 0.0:
                    return finish(SolveStatus.STALLED, xb, ytrial, dual_res, prim_res)
            pwa = build_derivative(xb, xhat, d, yb, sigma, sigma_x_inv, scaled)
            if pwa.eta <= 0.0:
                # Certified proof the proximal weight undershot the negative
                # curvature (a failed eigenvalue bound or a mislabeled convex
                # problem); fall back to the always-valid Gershgorin bound.
                if curvature_repaired:
                    return finish(SolveStatus.STALLED, xb, ytrial,
                                  dual_res, prim_res)
                curvature_repaired = True
                lam_g = min(gershgorin_lower_bound(scaled.Q), -1e-6)
                sigma_x_inv = np.full(n, abs(lam_g - 1e-6))
                continue
            tau = exact_linesearch(pwa)
            counters.newton_iterations += 1
            if abs(tau) < STAGNATION_TOL:
                stagnations += 1
                if stagnations == 1:
                    sysm = nt.refresh_system(sysm, active, sigma, sigma_x_inv,
                                             scaled, settings, counters,
                                             force_refactor=True)
                    continue
                return finish(SolveStatus.STALLED, xb, ytrial, dual_res, prim_res)
            stagnations = 0
            dx_b = tau * d
            xb = xb + dx_b
            if settings.log_iterates:
                info.iterates.append(xb.copy())

        # Outer bookkeeping at the accepted iterate.
        ax_b = scaled.A.matvec(xb)
        zb = np.clip(ax_b + yb / sigma, scaled.l, scaled.u)
        yb = yb + sigma * (ax_b - zb)
        prim_res_k, prim_rel_k = res.primal(ax_b, zb)
        outer_primal_ok = prim_res_k <= tols.eps_abs_k + tols.eps_rel_k * prim_rel_k
        if outer_primal_ok:
            xhat = xb.copy()
            tols.tighten_outer()
        resid_now = ax_b - zb
        sigma = update_sigma(sigma, resid_now, prev_update_resid, settings)
        prev_update_resid = resid_now
        tols.tighten_inner()
        info.outer_iterations = outer + 1
        if settings.log_iterates:
            info.audit.append({
                "outer": outer,
                "xhat_updated": outer_primal_ok,
                "outer_primal_ok": outer_primal_ok,
                "sigma": sigma.copy(),
                "eps_abs_k": tols.eps_abs_k, "eps_rel_k": tols.eps_rel_k,
                "delta_abs_k": tols.delta_abs_k, "delta_rel_k": tols.delta_rel_k,
            })
        if settings.enable_proximal_update and not settings.nonconvex:
            sigma_x_inv = np.maximum(sigma_x_inv / settings.gamma_upd,
                                     1.0 / settings.gamma_max)
        # Convex refinement: once the primal criterion holds at its final
        # tolerance but the dual residual stops halving for 10 consecutive
        # outer iterations, drop the proximal weight to its floor.
        primal_final_ok = prim_res_k <= settings.eps_abs + settings.eps_rel * prim_rel_k
        if not settings.nonconvex and primal_final_ok and sigma_x_inv[0] > 1e-12:
            if last_dual_res > 0.5 * best_dual_res:
                dual_stall_outer += 1
            else:
                dual_stall_outer = 0
            if dual_stall_outer >= 10:
                sigma_x_inv = np.full(n, 1e-12)
                dual_stall_outer = 0
        else:
            dual_stall_outer = 0
        best_dual_res = min(best_dual_res, last_dual_res)

    ax_b = scaled.A.matvec(xb)
    zb = np.clip(ax_b + yb / sigma, scaled.l, scaled.u)
    ytrial = yb + sigma * (ax_b - zb)
    qx_b = scaled.Q.matvec(xb)
    aty_b = scaled.A.rmatvec(ytrial)
    dual_res, _ = res.dual(qx_b, scaled.q, aty_b)
    prim_res, _ = res.primal(ax_b, zb)
    return finish(SolveStatus.MAX_ITER, xb, ytrial, dual_res, prim_res)
