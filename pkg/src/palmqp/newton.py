"""Semismooth Newton system assembly, factorization reuse and direction solve.

Two formulations of the same Newton system are supported:

* ``kkt``: the augmented quasidefinite matrix with one row per constraint,
  where inactive constraints are placeholder rows (zero apart from the
  diagonal -1/sigma_j); active-set changes map to row additions/deletions.
* ``schur``: the SPD matrix Q + Sx^-1 + A_J' Sy_JJ A_J; active-set changes
  map to rank-one updates/downdates with sqrt(sigma_i) * A_i.

The fill-reducing ordering is computed once per mode on the fully-active
pattern and reused for every refactorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import ldl
from .ordering import compute_ordering
from .sparse import SparseMatrix


@dataclass
class Counters:
    factorizations: int = 0
    rank_updates: int = 0
    newton_iterations: int = 0


@dataclass
class ActiveSet:
    members: np.ndarray
    entered: np.ndarray
    left: np.ndarray

    @property
    def size(self) -> int:
        return self.members.size


def detect_active_set(x, y, sigma_y, a, l, u, previous: ActiveSet | None = None) -> ActiveSet:
    """Indices i with (Ax + y/sigma)_i outside the closed interval [l_i, u_i]."""
    amat = a.to_scipy_full() if isinstance(a, SparseMatrix) else a
    v = amat @ x + y / sigma_y
    members = np.flatnonzero((v < l) | (v > u)).astype(np.int64)
    if previous is None:
        prev = np.zeros(0, dtype=np.int64)
    else:
        prev = previous.members
    entered = np.setdiff1d(members, prev, assume_unique=True)
    left = np.setdiff1d(prev, members, assume_unique=True)
    return ActiveSet(members, entered, left)


def subproblem_gradient(x, xhat, y, sigma_y, sigma_x_inv, problem):
    """Gradient of the regularized inner objective plus the trial pair.

    Returns (grad, ytrial, z) with z the box projection of Ax + y/sigma,
    ytrial = y + sigma*(Ax - z) and
    grad = Qx + q + A'ytrial + Sx^-1 (x - xhat).
    """
    ax = problem.A.matvec(x)
    z = np.clip(ax + y / sigma_y, problem.l, problem.u)
    ytrial = y + sigma_y * (ax - z)
    grad = problem.Q.matvec(x) + problem.q + problem.A.rmatvec(ytrial) \
        + sigma_x_inv * (x - xhat)
    return grad, ytrial, z


def select_linsys(q, a, n, m) -> str:
    """Pick the cheaper formulation from nonzero-count work estimates.

    The factorization work ratio is estimated as (n/(n+m)) |K|^2 / |H~|^2
    where |H~| overestimates the Schur nonzeros from per-row counts of A;
    the kkt form is chosen iff the ratio is strictly below 2.
    """
    if m == 0:
        return "schur"
    q_full = q.to_scipy_full() if isinstance(q, SparseMatrix) else q
    a_csr = a.to_scipy_full_csr() if isinstance(a, SparseMatrix) else a.tocsr()
    diag_present = np.count_nonzero(q_full.diagonal())
    nq = q_full.nnz + (n - diag_present)      # Sx^-1 fills the whole diagonal
    nk = nq + 2 * a_csr.nnz + m
    rc = np.diff(a_csr.indptr)
    ihat = int(np.argmax(rc))
    ahat = int(rc[ihat])
    rest = np.delete(rc, ihat)
    ov = np.maximum(ahat + rest - n, 0)
    nh = nq + ahat * ahat - ahat + int(np.sum(rest * rest - rest - ov * ov + ov))
    ratio = (n / (n + m)) * (nk / nh) ** 2
    return "kkt" if ratio < 2.0 else "schur"


class NewtonSystem:
    """Factorized Newton system for one iterate's active set."""

    def __init__(self, mode, factors, active, sigma_snapshot, sigma_x_inv, ordering):
        self.mode = mode
        self.factors = factors
        self.active = active
        self.sigma_snapshot = sigma_snapshot.copy()
        self.sigma_x_inv = sigma_x_inv.copy()
        self.ordering = ordering


def _kkt_ordering(problem):
    n, m = problem.n, problem.m
    qf = problem.Q.to_scipy_full()
    pattern = sp.bmat([[qf + sp.eye(n), problem.A.to_scipy_full().T],
                       [problem.A.to_scipy_full(), sp.eye(m)]], format="csc")
    return compute_ordering(SparseMatrix.from_scipy(pattern, symmetric=True))


def _schur_ordering(problem):
    n = problem.n
    a = problem.A.to_scipy_full()
    pattern = (problem.Q.to_scipy_full() + a.T @ a + sp.eye(n)).tocsc()
    return compute_ordering(SparseMatrix.from_scipy(pattern, symmetric=True))


def compute_orderings(problem, mode):
    return _kkt_ordering(problem) if mode == "kkt" else _schur_ordering(problem)


def _assemble_kkt(problem, members, sigma_y, sigma_x_inv):
    n, m = problem.n, problem.m
    qblock = problem.Q.to_scipy_full() + sp.diags(sigma_x_inv)
    a_act = sp.lil_matrix((m, n))
    if members.size:
        a_full = problem.A.to_scipy_full_csr()
        a_act = sp.csr_matrix((m, n))
        sel = sp.csr_matrix((np.ones(members.size), (members, members)), shape=(m, m))
        a_act = sel @ a_full
    kkt = sp.bmat([[qblock, a_act.T], [a_act, -sp.diags(1.0 / sigma_y)]], format="csc")
    return SparseMatrix.from_scipy(sp.triu(kkt, format="csc"), symmetric=True)


def _assemble_schur(problem, members, sigma_y, sigma_x_inv):
    n = problem.n
    h = problem.Q.to_scipy_full() + sp.diags(sigma_x_inv)
    if members.size:
        a_full = problem.A.to_scipy_full_csr()
        aj = a_full[members, :]
        h = h + aj.T @ sp.diags(sigma_y[members]) @ aj
    return SparseMatrix.from_scipy(sp.triu(h.tocsc(), format="csc"), symmetric=True)


def _kkt_column(problem, j, sigma_j, pinv):
    """Permuted dense K-column for constraint row j entering the active set."""
    n, m = problem.n, problem.m
    a_csr = problem.A.to_scipy_full_csr()
    col = np.zeros(n + m)
    lo, hi = a_csr.indptr[j], a_csr.indptr[j + 1]
    colperm = np.zeros(n + m)
    colperm[pinv[a_csr.indices[lo:hi]]] = a_csr.data[lo:hi]
    colperm[pinv[n + j]] = -1.0 / sigma_j
    return colperm


def _schur_vector(problem, j, sigma_j, pinv):
    a_csr = problem.A.to_scipy_full_csr()
    lo, hi = a_csr.indptr[j], a_csr.indptr[j + 1]
    w = np.zeros(problem.n)
    w[pinv[a_csr.indices[lo:hi]]] = np.sqrt(sigma_j) * a_csr.data[lo:hi]
    return w


def _refactorize(mode, problem, active, sigma_y, sigma_x_inv, ordering, counters):
    if mode == "kkt":
        kmat = _assemble_kkt(problem, active.members, sigma_y, sigma_x_inv)
    else:
        kmat = _assemble_schur(problem, active.members, sigma_y, sigma_x_inv)
    factors = ldl.ldl_factorize(kmat, ordering)
    counters.factorizations += 1
    return NewtonSystem(mode, factors, active, sigma_y, sigma_x_inv, ordering)


def refresh_system(sys, active, sigma_y, sigma_x_inv, problem, settings,
                   counters, mode=None, ordering=None, force_refactor=False):
    """Return a system current for ``active`` and the penalty diagonals.

    Reuses ``sys`` through low-rank factor updates when the active-set delta
    and the number of changed active penalties stay under the configured
    limits; otherwise refactorizes from scratch. Any change in the proximal
    diagonal forces a refactorization.
    """
    n, m = problem.n, problem.m
    if sys is not None:
        mode = sys.mode
        ordering = sys.ordering
    if m == 0:
        mode = "schur"  # the constraint block is empty either way
    elif mode is None:
        mode = select_linsys(problem.Q, problem.A, n, m) \
            if settings.linsys == "auto" else settings.linsys
    if ordering is None:
        ordering = compute_orderings(problem, mode)

    if sys is None or force_refactor or np.any(sys.sigma_x_inv != sigma_x_inv):
        return _refactorize(mode, problem, active, sigma_y, sigma_x_inv,
                            ordering, counters)

    prev = sys.active.members
    entered = np.setdiff1d(active.members, prev, assume_unique=True)
    left = np.setdiff1d(prev, active.members, assume_unique=True)
    changed = np.flatnonzero(sigma_y != sys.sigma_snapshot)
    staying = np.setdiff1d(active.members, entered, assume_unique=True)
    changed_active = np.intersect1d(changed, staying, assume_unique=True)

    limit = min(settings.max_rank_update,
                settings.max_rank_update_fraction * (n + m))
    if entered.size + left.size > limit or changed_active.size > limit / 2:
        return _refactorize(mode, problem, active, sigma_y, sigma_x_inv,
                            ordering, counters)

    f = sys.factors
    pinv = f.pinv
    if mode == "kkt":
        for j in left:
            ldl.row_delete(f, pinv[n + j], -1.0 / sigma_y[j])
            counters.rank_updates += 1
        # Placeholder diagonals track the current sigma for inactive rows.
        inactive_changed = np.setdiff1d(changed, active.members, assume_unique=False)
        for j in np.setdiff1d(inactive_changed, left, assume_unique=False):
            ldl.row_delete(f, pinv[n + j], -1.0 / sigma_y[j])
        for j in changed_active:
            beta = pinv[n + j]
            ldl.row_delete(f, beta, -1.0 / sigma_y[j])
            ldl.row_add(f, beta, _kkt_column(problem, j, sigma_y[j], pinv),
                        -1.0 / sigma_y[j])
            counters.rank_updates += 2
        for j in entered:
            ldl.row_add(f, pinv[n + j], _kkt_column(problem, j, sigma_y[j], pinv),
                        -1.0 / sigma_y[j])
            counters.rank_updates += 1
    else:
        for j in left:
            ldl.rank1_update(f, _schur_vector(problem, j, sys.sigma_snapshot[j], pinv), -1)
            counters.rank_updates += 1
        for j in changed_active:
            ldl.rank1_update(f, _schur_vector(problem, j, sys.sigma_snapshot[j], pinv), -1)
            ldl.rank1_update(f, _schur_vector(problem, j, sigma_y[j], pinv), +1)
            counters.rank_updates += 2
        for j in entered:
            ldl.rank1_update(f, _schur_vector(problem, j, sigma_y[j], pinv), +1)
            counters.rank_updates += 1

    sys.active = active
    sys.sigma_snapshot = sigma_y.copy()
    return sys


def newton_direction(sys: NewtonSystem, grad) -> np.ndarray:
    """Direction d solving H d = -grad through the factored system."""
    grad = np.asarray(grad, dtype=np.float64)
    n = grad.size
    if sys.mode == "schur":
        return ldl.ldl_solve(sys.factors, -grad)
    m = sys.factors.n - n
    rhs = np.concatenate([-grad, np.zeros(m)])
    sol = ldl.ldl_solve(sys.factors, rhs)
    return sol[:n]
