"""Benchmark problem generators: portfolio, optimal control, random QPs.

All generators are pure functions of their dimensions and seed.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .problem import QpProblem
from .sparse import SparseMatrix


def gen_portfolio(n, seed, beta=1.0) -> QpProblem:
    """Risk-adjusted asset allocation in the lifted (x, y) form.

    Variables are the n allocations plus r = ceil(n/10) factor exposures;
    the quadratic term is block diagonal (asset-specific variances and the
    identity on the factor block), the linear term folds the risk aversion
    into the expected returns. Constraints: componentwise bounds on all
    variables (allocations nonnegative, exposures free), the budget row
    summing allocations to one, and the factor-coupling rows y = F'x.
    """
    if n < 10:
        raise ValueError("portfolio generator needs n >= 10")
    rng = np.random.default_rng(seed)
    r = math.ceil(n / 10)
    dvec = rng.uniform(0.0, math.sqrt(r), size=n)
    fmask = rng.random((n, r)) < 0.5
    fmat = np.where(fmask, rng.standard_normal((n, r)), 0.0)
    mu = rng.uniform(0.0, 1.0, size=n)

    nv = n + r
    qdiag = 2.0 * np.concatenate([dvec, np.ones(r)])
    qmat = SparseMatrix.from_triplets(nv, nv, np.arange(nv), np.arange(nv),
                                      qdiag, symmetric=True)
    qvec = np.concatenate([-mu / beta, np.zeros(r)])

    bounds = sp.eye(nv, format="csc")
    budget = sp.csc_matrix(np.concatenate([np.ones(n), np.zeros(r)])[None, :])
    coupling = sp.hstack([sp.csc_matrix(fmat.T), -sp.eye(r)], format="csc")
    amat = SparseMatrix.from_scipy(sp.vstack([bounds, budget, coupling], format="csc"))

    l = np.concatenate([np.zeros(n), np.full(r, -np.inf), [1.0], np.zeros(r)])
    u = np.concatenate([np.full(n, np.inf), np.full(r, np.inf), [1.0], np.zeros(r)])
    return QpProblem(qmat, qvec, amat, l, u)


def gen_mpc(nx, nu, horizon, seed):
    """Condensed finite-horizon optimal control QP and its metadata.

    Decision variable z = (x_0, u_0, x_1, ..., u_{N-1}, x_N). Returns
    (problem, data) where data carries the system matrices, limits and the
    initial state, as needed for receding-horizon re-solves. The terminal
    cost and constraint reuse the stage cost and stage box. The drawn system
    matrix is rescaled to spectral radius at most 1.2 and the initial state
    is scaled onto a verified-feasible trajectory.
    """
    if nx < 1 or nu < 1 or horizon < 1:
        raise ValueError("need nx, nu, N >= 1")
    rng = np.random.default_rng(seed)
    N = horizon
    mmat = np.where(rng.random((nx, nx)) < 0.5, rng.normal(0.0, 5.0, (nx, nx)), 0.0)
    qstage = mmat.T @ mmat + 1e-6 * np.eye(nx)
    rstage = 0.01 * np.eye(nu)
    asys = rng.normal(0.0, 2.0, (nx, nx))
    rad = max(abs(np.linalg.eigvals(asys)))
    if rad > 1.2:
        asys *= 1.2 / rad
    bsys = rng.normal(0.0, 1.0, (nx, nu))
    xb = np.abs(rng.normal(10.0, 2.0, nx))
    ub = np.abs(rng.normal(10.0, 2.0, nu))

    # Scale a candidate trajectory until it sits inside 90% of the boxes;
    # linearity in (x0, inputs) makes the scaled trajectory feasible too.
    x0_trial = rng.uniform(-1.0, 1.0, nx) * xb
    u_trial = rng.uniform(-0.5, 0.5, (N, nu)) * ub
    traj = [x0_trial]
    for k in range(N):
        traj.append(asys @ traj[-1] + bsys @ u_trial[k])
    ratios = [np.max(np.abs(xk) / xb) for xk in traj]
    ratios += [np.max(np.abs(uk) / ub) for uk in u_trial]
    scale = 0.9 / max(max(ratios), 1e-12)
    x_init = x0_trial * min(scale, 1.0)

    nz = (N + 1) * nx + N * nu
    stride = nx + nu

    diag_blocks = []
    for _ in range(N):
        diag_blocks.append(2.0 * qstage)
        diag_blocks.append(2.0 * rstage)
    diag_blocks.append(2.0 * qstage)
    qmat = SparseMatrix.from_scipy(sp.block_diag(diag_blocks, format="csc"),
                                   symmetric=True)
    qvec = np.zeros(nz)

    rows = []
    init = sp.lil_matrix((nx, nz))
    init[:, :nx] = np.eye(nx)
    rows.append(init.tocsc())
    for k in range(N):
        dyn = sp.lil_matrix((nx, nz))
        off = k * stride
        dyn[:, off:off + nx] = asys
        dyn[:, off + nx:off + nx + nu] = bsys
        dyn[:, off + stride:off + stride + nx] = -np.eye(nx)
        rows.append(dyn.tocsc())
    rows.append(sp.eye(nz, format="csc"))
    amat = SparseMatrix.from_scipy(sp.vstack(rows, format="csc"))

    box_l = np.concatenate([np.concatenate([-xb, -ub]) for _ in range(N)] + [-xb])
    box_u = np.concatenate([np.concatenate([xb, ub]) for _ in range(N)] + [xb])
    meq = nx * (N + 1)
    l = np.concatenate([x_init, np.zeros(nx * N), box_l])
    u = np.concatenate([x_init, np.zeros(nx * N), box_u])
    problem = QpProblem(qmat, qvec, amat, l, u)
    data = {"nx": nx, "nu": nu, "N": N, "A": asys, "B": bsys,
            "x_init": x_init, "xb": xb, "ub": ub, "n_eq": meq}
    return problem, data


def mpc_set_initial_state(problem, data, x_init):
    """New problem with the initial-state equality rows pinned to ``x_init``."""
    l = problem.l.copy()
    u = problem.u.copy()
    l[:data["nx"]] = x_init
    u[:data["nx"]] = x_init
    return QpProblem(problem.Q, problem.q, problem.A, l, u)


def shift_warm_start(data, x, y):
    """Shift a solved trajectory one sample forward as the next warm start.

    The tail is padded by propagating the terminal state with zero input;
    dual variables shift blockwise with zero padding.
    """
    nx, nu, N = data["nx"], data["nu"], data["N"]
    stride = nx + nu
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xs = [x[k * stride:k * stride + nx] for k in range(N + 1)]
    us = [x[k * stride + nx:(k + 1) * stride] for k in range(N)]
    new_states = xs[1:] + [data["A"] @ xs[-1]]
    new_inputs = us[1:] + [np.zeros(nu)]
    parts = []
    for k in range(N):
        parts += [new_states[k], new_inputs[k]]
    parts.append(new_states[N])
    xw = np.concatenate(parts)

    n_eq = data["n_eq"]
    y_eq = y[:n_eq]
    y_box = y[n_eq:]
    eq_shift = np.concatenate([y_eq[nx:], np.zeros(nx)])
    box_shift = np.concatenate([y_box[stride:], np.zeros(stride)])
    return xw, np.concatenate([eq_shift, box_shift])


def gen_random_qp(n, m, density, convex, seed, lam_min=-1.0) -> QpProblem:
    """Random sparse QP with bounds enclosing a known feasible point.

    Convex instances use Q = G'G + 0.01 I; nonconvex ones shift a random
    symmetric matrix so its minimum eigenvalue equals ``lam_min``.
    """
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    if convex:
        g = np.where(rng.random((n, n)) < density, rng.standard_normal((n, n)), 0.0)
        qd = g.T @ g + 1e-2 * np.eye(n)
    else:
        base = np.where(rng.random((n, n)) < density, rng.standard_normal((n, n)), 0.0)
        base = (base + base.T) / 2.0
        shift = lam_min - np.linalg.eigvalsh(base)[0]
        qd = base + shift * np.eye(n)
    qmat = SparseMatrix.from_dense(qd, symmetric=True)
    qvec = rng.standard_normal(n)
    ad = np.where(rng.random((m, n)) < density, rng.standard_normal((m, n)), 0.0)
    amat = SparseMatrix.from_dense(ad) if m else SparseMatrix.zeros(0, n)
    x_feas = rng.standard_normal(n)
    ax = amat.matvec(x_feas) if m else np.zeros(0)
    slack_lo = rng.uniform(0.1, 2.0, m)
    slack_hi = rng.uniform(0.1, 2.0, m)
    return QpProblem(qmat, qvec, amat, ax - slack_lo, ax + slack_hi)
