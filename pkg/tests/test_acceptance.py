"""Acceptance suite: one test per criterion, one pass/fail line each.

Every tolerance is pinned here; nothing is deferred to later calibration.
Oracles are independent of the code paths they check: dense eigensolvers,
brute-force enumeration, bisection, finite reconstruction.
"""

import math
import time

import numpy as np
import pytest

from palmqp import (QpProblem, Settings, SolveStatus, ldl_factorize, ldl_solve,
                    min_eigenvalue, rank1_update, row_add, row_delete, solve,
                    verify_dual_infeasibility, verify_primal_infeasibility,
                    verify_termination)
from palmqp.generators import (gen_mpc, gen_portfolio, mpc_set_initial_state,
                               shift_warm_start)
from palmqp.linesearch import PwaDerivative, build_derivative, exact_linesearch
from palmqp.newton import Counters, detect_active_set, newton_direction, refresh_system
from palmqp.solver import init_sigma, select_proximal
from palmqp.sparse import SparseMatrix
from palmqp.stats import BenchRecord, performance_profile, sgm, sgm_by_solver

from test_infeasibility import (make_dual_infeasible_curvature,
                                make_dual_infeasible_ray, make_primal_infeasible)
from test_solver import brute_force_box_qp


def _report(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
    assert ok, f"{name} failed: {detail}"


def _sym(mat):
    return SparseMatrix.from_dense(mat, symmetric=True)


def _problem(Q, q, A, l, u):
    return QpProblem(SparseMatrix.from_dense(Q, symmetric=True), q,
                     SparseMatrix.from_dense(np.atleast_2d(np.asarray(A, dtype=float))),
                     l, u)


def test_p1_oracle_equivalence_convex():
    t0 = time.perf_counter()
    st = Settings(eps_abs=1e-6, eps_rel=1e-6)
    failures = []
    for seed in range(200):
        rng = np.random.default_rng(1_000 + seed)
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 7))
        g = rng.standard_normal((n, n))
        Q = g @ g.T + 1e-2 * np.eye(n)
        q = rng.standard_normal(n)
        A = rng.standard_normal((m, n))
        xf = rng.standard_normal(n)
        ax = A @ xf
        l = ax - rng.uniform(0.1, 1.5, m)
        u = ax + rng.uniform(0.1, 1.5, m)
        p = _problem(Q, q, A, l, u)
        r = solve(p, st)
        xo, _ = brute_force_box_qp(Q, q, A, l, u)
        if (r.status is not SolveStatus.SOLVED or xo is None
                or np.abs(r.x - xo).max() > 1e-4):
            failures.append(seed)
    elapsed = time.perf_counter() - t0
    _report("P1 oracle equivalence (convex)",
            not failures and elapsed < 60.0,
            f"failures={failures} runtime={elapsed:.1f}s")


def test_p2_stationarity_nonconvex():
    st = Settings(nonconvex=True, eps_abs=1e-6, eps_rel=1e-6)
    unverified = []
    for seed in range(100):
        rng = np.random.default_rng(2_000 + seed)
        n = int(rng.integers(2, 21))
        lam_target = float(rng.uniform(-10.0, -0.1))
        b = rng.standard_normal((n, n))
        b = (b + b.T) / 2
        Q = b + (lam_target - np.linalg.eigvalsh(b)[0]) * np.eye(n)
        q = rng.standard_normal(n)
        m_extra = int(rng.integers(0, 4))
        A = np.vstack([np.eye(n), rng.standard_normal((m_extra, n))])
        xf = rng.uniform(-1, 1, n)
        ax = A @ xf
        l = ax - rng.uniform(0.5, 2.0, n + m_extra)
        u = ax + rng.uniform(0.5, 2.0, n + m_extra)
        p = _problem(Q, q, A, l, u)
        r = solve(p, st)
        if r.status is SolveStatus.SOLVED:
            ok = verify_termination(p, r.x, r.y, 1e-6, 1e-6, r.info.sigma_unscaled)
        elif r.status is SolveStatus.DUAL_INFEASIBLE:
            ok = verify_dual_infeasibility(p, r.certificate, st.eps_dinf,
                                           nonconvex=True)
        else:
            ok = False
        if not ok:
            unverified.append((seed, r.status.value))
    _report("P2 stationarity (nonconvex)", not unverified,
            f"unverified={unverified}")


def test_p3_factorization_suite():
    rng = np.random.default_rng(3_000)
    bad = []
    for trial in range(1000):
        n1 = int(rng.integers(1, 101))
        n2 = int(rng.integers(1, 100))
        nn = min(n1 + n2, 200)
        n1 = min(n1, nn - 1) or 1
        n2 = nn - n1
        g1 = rng.standard_normal((n1, n1))
        g2 = rng.standard_normal((n2, n2))
        b = rng.standard_normal((n2, n1))
        k = np.block([[g1 @ g1.T + 0.5 * np.eye(n1), b.T],
                      [b, -(g2 @ g2.T + 0.5 * np.eye(n2))]])
        k_live = k.copy()
        perm = rng.permutation(nn)
        f = ldl_factorize(_sym(k), perm)
        pinv = f.pinv
        placeholder = {}
        for _ in range(int(rng.integers(2, 7))):
            op = rng.integers(0, 3)
            if op == 0:
                w_orig = np.zeros(nn)
                w_orig[:n1] = rng.standard_normal(n1) * 0.3
                rank1_update(f, w_orig[perm], +1)
                k_live += np.outer(w_orig, w_orig)
            elif op == 1 and len(placeholder) < n2 - 1:
                j = int(rng.integers(n1, nn))
                if j in placeholder:
                    continue
                row_delete(f, pinv[j], -1.0)
                placeholder[j] = k_live[j].copy()
                k_live[j, :] = 0.0
                k_live[:, j] = 0.0
                k_live[j, j] = -1.0
            elif op == 2 and placeholder:
                j, saved = placeholder.popitem()
                colp = np.zeros(nn)
                colp[pinv[np.arange(nn)]] = saved
                row_add(f, pinv[j], colp, saved[j])
                k_live[j, :] = saved
                k_live[:, j] = saved
        norm = np.abs(k_live).max()
        if np.abs(f.reconstruct() - k_live).max() > 1e-9 * (1.0 + norm):
            bad.append((trial, "reconstruction"))
            continue
        bvec = rng.standard_normal(nn)
        fresh = ldl_factorize(_sym(k_live), perm)
        xa, xf = ldl_solve(f, bvec), ldl_solve(fresh, bvec)
        if np.abs(xa - xf).max() > 1e-8 * max(np.abs(xf).max(), 1.0):
            bad.append((trial, "solve"))

    # KKT-vs-Schur direction agreement on 100 random subproblems
    for seed in range(100):
        rng2 = np.random.default_rng(3_500 + seed)
        n = int(rng2.integers(2, 30))
        m = int(rng2.integers(1, 30))
        g = rng2.standard_normal((n, n))
        Q = g @ g.T + 0.1 * np.eye(n)
        A = rng2.standard_normal((m, n))
        p = _problem(Q, np.zeros(n), A, -np.ones(m), np.ones(m))
        sigma = rng2.uniform(0.5, 20.0, m)
        sxi = np.full(n, 1e-7)
        x = rng2.standard_normal(n)
        y = rng2.standard_normal(m)
        active = detect_active_set(x, y, sigma, p.A, p.l, p.u)
        grad = rng2.standard_normal(n)
        dirs = {}
        for mode in ("kkt", "schur"):
            sysm = refresh_system(None, active, sigma, sxi, p,
                                  Settings(linsys=mode), Counters())
            dirs[mode] = newton_direction(sysm, grad)
        if np.abs(dirs["kkt"] - dirs["schur"]).max() > \
                1e-8 * max(np.abs(dirs["schur"]).max(), 1.0):
            bad.append((seed, "kkt-vs-schur"))
    _report("P3 factorization suite", not bad, f"bad={bad[:5]}")


def test_p4_lobpcg_suite():
    bad = []
    eps = 1e-5
    for seed in range(100):
        rng = np.random.default_rng(4_000 + seed)
        n = int(rng.integers(2, 201))
        m = rng.standard_normal((n, n))
        m = (m + m.T) / 2
        hist = []
        est = min_eigenvalue(_sym(m), eps=eps, history=hist)
        lam_true = np.linalg.eigvalsh(m)[0]
        scale = 1.0 + np.abs(m).sum(axis=1).max()
        if est.lambda_lb > lam_true + 1e-8 * scale:
            bad.append((seed, "not a lower bound"))
        if lam_true - est.lambda_lb > 2 * eps * scale:
            bad.append((seed, "bound too loose"))
        lams = [h[0] for h in hist]
        for a, b in zip(lams, lams[1:]):
            if b > a + 1e-12 * (1.0 + abs(a)):
                bad.append((seed, "rayleigh not monotone"))
                break
    _report("P4 minimum-eigenvalue suite", not bad, f"bad={bad[:5]}")


def test_p5_linesearch_suite():
    rng = np.random.default_rng(5_000)
    bad = 0
    for trial in range(10_000):
        m = int(rng.integers(0, 10))
        eta = float(rng.uniform(0.05, 10.0))
        delta = rng.standard_normal(2 * m)
        delta[rng.random(2 * m) < 0.2] = 0.0
        alpha = rng.standard_normal(2 * m) * 3.0
        at_zero = float(delta @ np.maximum(-alpha, 0.0))
        beta = -at_zero - float(rng.uniform(0.05, 10.0))
        pwa = PwaDerivative(eta, beta, delta, alpha)
        t = exact_linesearch(pwa)
        scale = max(abs(eta) * abs(t) + abs(beta) + float(delta @ delta), 1.0)
        if abs(pwa(t)) > 1e-10 * scale:
            bad += 1
            continue
        lo, hi = -1e7, 1e7
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if pwa(mid) < 0:
                lo = mid
            else:
                hi = mid
        tb = 0.5 * (lo + hi)
        if abs(t - tb) > 1e-10 * max(1.0, abs(tb)) + 1e-9:
            bad += 1

    # scale equivariance on solver-shaped instances
    for seed in range(200):
        rng2 = np.random.default_rng(5_500 + seed)
        n, m = 5, 4
        g = rng2.standard_normal((n, n))
        p = _problem(g @ g.T + np.eye(n), rng2.standard_normal(n),
                     rng2.standard_normal((m, n)), -np.ones(m), np.ones(m))
        x = rng2.standard_normal(n)
        xhat = rng2.standard_normal(n)
        d = rng2.standard_normal(n)
        y = rng2.standard_normal(m)
        sigma = rng2.uniform(0.5, 5.0, m)
        sxi = np.full(n, 1e-5)
        t1 = exact_linesearch(build_derivative(x, xhat, d, y, sigma, sxi, p))
        s = float(rng2.uniform(0.1, 10.0))
        ts = exact_linesearch(build_derivative(x, xhat, s * d, y, sigma, sxi, p))
        if abs(ts - t1 / s) > 1e-10 * max(1.0, abs(t1 / s)):
            bad += 1
    _report("P5 linesearch suite", bad == 0, f"bad={bad}")


def test_p6_infeasibility_detection():
    missed = []
    st_p = Settings(eps_pinf=1e-5)
    for seed in range(50):
        p = make_primal_infeasible(seed)
        r = solve(p, st_p)
        if r.status is not SolveStatus.PRIMAL_INFEASIBLE or \
                not verify_primal_infeasibility(p, r.certificate, 1e-5):
            missed.append(("primal", seed))
    st_ray = Settings(eps_dinf=1e-5)
    for seed in range(25):
        p, _ = make_dual_infeasible_ray(seed)
        r = solve(p, st_ray)
        if r.status is not SolveStatus.DUAL_INFEASIBLE or \
                not verify_dual_infeasibility(p, r.certificate, 1e-5):
            missed.append(("dual-ray", seed))
    st_cur = Settings(eps_dinf=1e-5, nonconvex=True)
    for seed in range(25):
        p, warm_x = make_dual_infeasible_curvature(seed)
        r = solve(p, st_cur, warm=(warm_x, np.zeros(p.m)))
        if r.status is not SolveStatus.DUAL_INFEASIBLE or \
                not verify_dual_infeasibility(p, r.certificate, 1e-5, nonconvex=True):
            missed.append(("dual-curvature", seed))

    false_pos = []
    st = Settings()
    for seed in range(1000):
        rng = np.random.default_rng(60_000 + seed)
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 6))
        g = rng.standard_normal((n, n))
        Q = g @ g.T + 1e-2 * np.eye(n)
        A = rng.standard_normal((m, n))
        ax = A @ rng.standard_normal(n)
        p = _problem(Q, rng.standard_normal(n), A,
                     ax - rng.uniform(0.1, 2, m), ax + rng.uniform(0.1, 2, m))
        r = solve(p, st)
        if r.status in (SolveStatus.PRIMAL_INFEASIBLE, SolveStatus.DUAL_INFEASIBLE):
            false_pos.append(seed)
    _report("P6 infeasibility detection", not missed and not false_pos,
            f"missed={missed[:5]} false_positives={false_pos[:5]}")


def test_p7_application_presets():
    st = Settings(eps_abs=1e-6, eps_rel=1e-6)
    slow = []
    for n in (100, 200, 300, 400, 500):
        p = gen_portfolio(n, seed=70 + n)
        t0 = time.perf_counter()
        r = solve(p, st)
        dt = time.perf_counter() - t0
        if r.status is not SolveStatus.SOLVED or dt > 30.0:
            slow.append((f"portfolio_{n}", r.status.value, round(dt, 2)))
    for N in (5, 10, 15, 20, 25, 30):
        p, _ = gen_mpc(10, 5, N, seed=700 + N)
        t0 = time.perf_counter()
        r = solve(p, st)
        dt = time.perf_counter() - t0
        if r.status is not SolveStatus.SOLVED or dt > 30.0:
            slow.append((f"mpc_{N}", r.status.value, round(dt, 2)))

    # sequential receding-horizon re-solves: warm vs cold Newton iterations
    problem, data = gen_mpc(10, 5, 30, seed=777)
    rng = np.random.default_rng(777)
    prev = solve(problem, st)
    warm_iters, cold_iters = [], []
    state = data["x_init"]
    for _ in range(30):
        u0 = prev.x[data["nx"]:data["nx"] + data["nu"]]
        state = data["A"] @ state + data["B"] @ u0 + rng.normal(0, 0.01, data["nx"])
        problem = mpc_set_initial_state(problem, data, state)
        warm = shift_warm_start(data, prev.x, prev.y)
        rw = solve(problem, st, warm=warm)
        rc = solve(problem, st)
        warm_iters.append(rw.info.newton_iterations)
        cold_iters.append(rc.info.newton_iterations)
        prev = rw if rw.status is SolveStatus.SOLVED else rc
    med_warm = float(np.median(warm_iters))
    med_cold = float(np.median(cold_iters))
    _report("P7 application presets", not slow and med_warm < med_cold,
            f"slow={slow} median_newton warm={med_warm} cold={med_cold}")


def test_p8_statistics():
    ok = True
    detail = []
    if sgm([1.0, 1.0], 1.0) != pytest.approx(1.0):
        ok, detail = False, ["sgm constant"]
    if sgm([0.0, 3.0], 1.0) != pytest.approx(1.0):
        ok, detail = False, detail + ["sgm two-point"]
    expected = math.exp((math.log(1.5) + math.log(3.0) + math.log(9.0)) / 3.0) - 1.0
    if abs(sgm([0.5, 2.0, 8.0], 1.0) - expected) > 1e-14:
        ok, detail = False, detail + ["sgm log-space"]
    table = sgm_by_solver([BenchRecord("p", "a", 0.5, "solved"),
                           BenchRecord("q", "a", 2.0, "time_limit")],
                          shift=1.0, time_limit=50.0)
    if abs(table["a"] - (math.sqrt(1.5 * 51.0) - 1.0)) > 1e-12:
        ok, detail = False, detail + ["failure-as-time-limit"]
    prof = performance_profile([BenchRecord("p1", "a", 1.0, "solved"),
                                BenchRecord("p1", "b", 2.0, "solved"),
                                BenchRecord("p2", "a", 2.0, "solved"),
                                BenchRecord("p2", "b", 1.0, "solved")])
    for s in ("a", "b"):
        pts = dict(prof[s])
        if pts.get(1.0) != pytest.approx(0.5) or pts.get(2.0) != pytest.approx(1.0):
            ok, detail = False, detail + ["profile hand example"]
    prof2 = performance_profile([BenchRecord("p1", "a", 1.0, "solved"),
                                 BenchRecord("p1", "b", 9.0, "max_iter")])
    if prof2["b"]:
        ok, detail = False, detail + ["failure must plateau below one"]
    _report("P8 statistics", ok, " ".join(detail))


def test_p9_remark_reproduction():
    p = _problem([[0.0, 1.0], [1.0, 0.0]], [0.0, 0.0], [[1.0, 0.0]], [0.0], [0.0])
    st = Settings(nonconvex=True, eps_abs=1e-6, eps_rel=1e-6)
    r = solve(p, st, warm=(np.array([1.0, 1.0]), np.array([0.0])))
    stationary_ok = r.status is SolveStatus.SOLVED and abs(r.x[0]) <= 1e-6

    x0 = np.array([0.5, -0.25])
    y0 = np.array([0.75])
    st2 = Settings(nonconvex=True, scaling_iters=0, log_iterates=True,
                   delta_abs0=1e-10, delta_rel0=1e-12)
    r2 = solve(p, st2, warm=(x0, y0))
    from palmqp.scaling import scale_problem
    scaled, sc = scale_problem(p, x0, 0)
    sigma = init_sigma(scaled, x0, st2)
    sxi, _ = select_proximal(scaled, st2)
    mat = np.diag(sxi) + np.array([[sigma[0], 1.0], [1.0, 0.0]])
    closed = np.linalg.solve(mat, sxi * x0 - np.array([y0[0], 0.0]))
    step_ok = (sc.c == 1.0 and len(r2.info.iterates) > 0
               and np.abs(r2.info.iterates[0] - closed).max() <= 1e-10)
    _report("P9 remark reproduction", stationary_ok and step_ok,
            f"x1={r.x[0]:.2e} step_err="
            f"{np.abs(r2.info.iterates[0] - closed).max():.2e}")
