"""Certified lower bound on the minimum eigenvalue of a symmetric matrix.

Single-vector locally optimal (block) preconditioned conjugate gradient
iteration: the Rayleigh quotient is minimized over span{x, w, p} where w is
the eigenvector residual and p a conjugate direction, via a small
generalized symmetric eigenproblem each step. On exit the reported bound is
``rayleigh(x) - ||w||_2``, which lies below the minimum eigenvalue once the
iteration has locked onto the bottom eigenpair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .sparse import SparseMatrix


class EigenError(ArithmeticError):
    """Basis matrix numerically singular after pruning."""


@dataclass
class EigEstimate:
    lambda_lb: float
    eigvec: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool = True


def small_generalized_symmetric_eig(amat, bmat):
    """Solve A v = mu B v for k-by-k symmetric A, SPD B, k <= 3.

    Returns eigenvalues ascending and the matching eigenvectors as columns.
    """
    amat = np.asarray(amat, dtype=np.float64)
    bmat = np.asarray(bmat, dtype=np.float64)
    k = amat.shape[0]
    if amat.shape != (k, k) or bmat.shape != (k, k) or k not in (1, 2, 3):
        raise ValueError("expected matching square matrices of size 1, 2 or 3")
    try:
        mu, vec = scipy.linalg.eigh(amat, bmat)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise EigenError(f"generalized eigenproblem failed: {exc}") from exc
    return mu, vec


def _default_start(n):
    # Deterministic all-ones vector with a fixed +/-1 perturbation pattern.
    idx = np.arange(n, dtype=np.uint64)
    bits = (idx * np.uint64(2654435761)) & np.uint64(0xFFFFFFFF)
    x0 = np.where(bits < np.uint64(0x80000000), 1.0, -1.0)
    return x0


def min_eigenvalue(q, x0=None, eps=1e-8, max_iter=10000, history=None) -> EigEstimate:
    """Lower bound on the minimum eigenvalue of symmetric ``q``.

    Iterates until the residual 2-norm drops below ``eps`` or ``max_iter``
    Ritz steps elapse; in the latter case the best estimate so far is
    returned flagged as unconverged. When ``history`` is a list, the
    Rayleigh value and iterate norm are appended each iteration.
    """
    if isinstance(q, SparseMatrix):
        if not q.symmetric:
            raise ValueError("minimum eigenvalue needs a symmetric-flagged matrix")
        op = q.to_scipy_full()
        n = q.nrows
    else:
        op = np.asarray(q, dtype=np.float64)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("expected a square matrix")
        n = op.shape[0]

    if x0 is None:
        x0 = _default_start(n)
    x = np.asarray(x0, dtype=np.float64).copy()
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise ValueError("starting vector must be nonzero")
    x /= nrm

    qx = op @ x
    lam = float(x @ qx)
    w = qx - lam * x
    res = float(np.linalg.norm(w))
    if history is not None:
        history.append((lam, float(np.linalg.norm(x))))
    if res <= eps:
        return EigEstimate(lam - res, x, 0, res)

    p = None
    for it in range(1, max_iter + 1):
        cols = [x, w / res]
        if p is not None:
            pn = np.linalg.norm(p)
            if pn > 0.0:
                cols.append(p / pn)
        s = np.column_stack(cols)
        gram = s.T @ s
        # Drop the conjugate direction (then the residual) if the basis
        # degenerates; [x, w] stays well conditioned since w is x-orthogonal.
        while gram.shape[0] > 1 and np.linalg.cond(gram) > 1e12:
            s = s[:, :-1]
            gram = s.T @ s
        qs = op @ s
        mu, vec = small_generalized_symmetric_eig(s.T @ qs, gram)
        y = vec[:, 0]
        xn = s @ y
        if s.shape[1] >= 2:
            p = s[:, 1:] @ y[1:]
        else:
            p = None
        x = xn / np.linalg.norm(xn)
        qx = op @ x
        lam = float(x @ qx)
        w = qx - lam * x
        res = float(np.linalg.norm(w))
        if history is not None:
            history.append((lam, float(np.linalg.norm(x))))
        if res <= eps:
            return EigEstimate(lam - res, x, it, res)
    return EigEstimate(lam - res, x, max_iter, res, converged=False)


def gershgorin_lower_bound(q) -> float:
    """Cheap lower bound min_i(Q_ii - sum_{j != i} |Q_ij|)."""
    if isinstance(q, SparseMatrix):
        full = q.to_scipy_full()
        diag = full.diagonal()
        absrow = np.asarray(np.abs(full).sum(axis=1)).ravel()
    else:
        qd = np.asarray(q, dtype=np.float64)
        diag = np.diag(qd)
        absrow = np.abs(qd).sum(axis=1)
    return float(np.min(diag - (absrow - np.abs(diag))))
