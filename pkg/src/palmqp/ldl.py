"""Updatable LDL^T factorization for SPD and quasidefinite matrices.

Factors are computed without pivoting under a caller-supplied symmetric
permutation, so the diagonal D may carry mixed signs (quasidefinite input).
The numerical kernel keeps the factor in a dense unit-lower workspace and
runs on BLAS; the ``L`` view materializes the factor as a ``SparseMatrix``
on demand.

Update routines (rank-one update/downdate, row addition and deletion)
mutate the factors in place. Factor objects are single-writer: never update
one concurrently; distinct factor objects are independent.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .sparse import SparseMatrix

# Relative threshold under which a pivot counts as zero.
PIVOT_RTOL = 1e-15


class ZeroPivotError(ArithmeticError):
    """Pivot vanished: input not strongly factorizable, or an update/row
    operation would create a zero diagonal entry."""


class LdlFactors:
    """Permutation, unit-lower factor and signed diagonal of P K P^T = L D L^T."""

    def __init__(self, perm, lower, d, ztol):
        self.perm = np.asarray(perm, dtype=np.int64)
        self._lower = lower          # dense, strict lower part is L, diag implied 1
        self.d = d
        self.ztol = float(ztol)
        self.pinv = np.empty_like(self.perm)
        self.pinv[self.perm] = np.arange(self.perm.size)

    @property
    def n(self) -> int:
        return self.d.size

    @property
    def D(self) -> np.ndarray:
        return self.d

    @property
    def L(self) -> SparseMatrix:
        """Unit lower triangular factor (unit diagonal implicit)."""
        strict = np.tril(self._lower, -1)
        return SparseMatrix.from_dense(strict + np.eye(self.n))

    def lower_dense(self) -> np.ndarray:
        """Dense unit-lower factor (explicit unit diagonal)."""
        return np.tril(self._lower, -1) + np.eye(self.n)

    def reconstruct(self) -> np.ndarray:
        """Dense K implied by the current factors, in original coordinates."""
        lo = self.lower_dense()
        kp = (lo * self.d) @ lo.T
        out = np.empty_like(kp)
        out[np.ix_(self.perm, self.perm)] = kp
        return out

    def copy(self) -> "LdlFactors":
        return LdlFactors(self.perm.copy(), self._lower.copy(), self.d.copy(), self.ztol)


def _dense_ldlt(kp, ztol, block=64):
    """Blocked right-looking LDL^T without pivoting. Returns (lower, d).

    Each block factors its diagonal part column by column, then recovers the
    panel below through one triangular solve and applies the trailing update
    as a single matrix product.
    """
    n = kp.shape[0]
    m = np.array(kp, dtype=np.float64, order="F")
    d = np.empty(n)
    for k0 in range(0, n, block):
        k1 = min(k0 + block, n)
        for k in range(k0, k1):
            dk = m[k, k]
            if not abs(dk) >= ztol:
                raise ZeroPivotError(f"zero pivot at index {k} (d={dk!r})")
            d[k] = dk
            if k + 1 < k1:
                m[k + 1:k1, k] /= dk
                m[k + 1:k1, k + 1:k1] -= np.outer(m[k + 1:k1, k],
                                                  dk * m[k + 1:k1, k])
        if k1 < n:
            lblk = np.tril(m[k0:k1, k0:k1], -1) + np.eye(k1 - k0)
            x = solve_triangular(lblk, m[k1:, k0:k1].T, lower=True,
                                 unit_diagonal=True, check_finite=False).T
            lpanel = x / d[k0:k1]
            m[k1:, k0:k1] = lpanel
            m[k1:, k1:] -= x @ lpanel.T
    return np.tril(m, -1), d


def _rank1_inplace(lower, d, w, sign, ztol):
    """In-place rank-one modification: factors of K + sign*w*w^T."""
    n = d.size
    w = np.array(w, dtype=np.float64)
    nz = np.flatnonzero(w)
    if nz.size == 0:
        return
    a = float(sign)
    for j in range(int(nz[0]), n):
        p = w[j]
        if p == 0.0:
            continue
        dj = d[j]
        dnew = dj + a * p * p
        if not abs(dnew) >= ztol:
            raise ZeroPivotError(f"rank-one modification zeroed pivot {j}")
        b = p * a / dnew
        a *= dj / dnew
        d[j] = dnew
        if j + 1 < n:
            wt = w[j + 1:]
            wt -= p * lower[j + 1:, j]
            lower[j + 1:, j] += b * wt


def _as_dense_square(k):
    if isinstance(k, SparseMatrix):
        if k.nrows != k.ncols:
            raise ValueError("factorization requires a square matrix")
        return k.to_dense()
    arr = np.asarray(k, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("factorization requires a square matrix")
    return arr


def ldl_factorize(k, perm=None) -> LdlFactors:
    """Factor a symmetric SPD or quasidefinite matrix under ``perm``.

    ``perm=None`` uses the identity. Raises :class:`ZeroPivotError` when a
    pivot falls below the relative threshold (not strongly factorizable or
    structurally singular input).
    """
    kd = _as_dense_square(k)
    n = kd.shape[0]
    if perm is None:
        perm = np.arange(n, dtype=np.int64)
    else:
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(n)):
            raise ValueError("perm is not a permutation of 0..N-1")
    norm = np.abs(kd).sum(axis=1).max() if n else 0.0
    ztol = PIVOT_RTOL * max(norm, 1e-300)
    kp = kd[np.ix_(perm, perm)]
    lower, d = _dense_ldlt(kp, ztol)
    return LdlFactors(perm, lower, d, ztol)


def ldl_solve(factors: LdlFactors, b) -> np.ndarray:
    """Solve K x = b with the factored K."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (factors.n,):
        raise ValueError(f"rhs has length {b.shape}, factor dimension is {factors.n}")
    if factors.n == 0:
        return np.zeros(0)
    lo = factors._lower
    y = solve_triangular(lo, b[factors.perm], lower=True, unit_diagonal=True,
                         check_finite=False)
    y /= factors.d
    xp = solve_triangular(lo.T, y, lower=False, unit_diagonal=True,
                          check_finite=False)
    x = np.empty_like(xp)
    x[factors.perm] = xp
    return x


def rank1_update(factors: LdlFactors, w, sign) -> LdlFactors:
    """Update factors to those of K + sign*w*w^T; ``w`` in permuted coordinates."""
    if sign not in (1, -1, 1.0, -1.0):
        raise ValueError("sign must be +1 or -1")
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (factors.n,):
        raise ValueError("update vector length mismatch")
    _rank1_inplace(factors._lower, factors.d, w, float(sign), factors.ztol)
    return factors


def row_add(factors: LdlFactors, beta, newcol, diag_value) -> LdlFactors:
    """Replace placeholder row/column ``beta`` by ``newcol`` and ``diag_value``.

    ``beta`` and ``newcol`` are in permuted (factor) coordinates; the entry
    ``newcol[beta]`` is ignored in favour of ``diag_value``. The current row
    and column ``beta`` must be zero apart from the placeholder diagonal.
    """
    n = factors.n
    beta = int(beta)
    if not 0 <= beta < n:
        raise ValueError("row index out of range")
    col = np.asarray(newcol, dtype=np.float64)
    if col.shape != (n,):
        raise ValueError("new column length mismatch")
    lo, d = factors._lower, factors.d
    if np.any(lo[beta, :beta] != 0.0) or np.any(lo[beta + 1:, beta] != 0.0):
        raise ValueError(f"row {beta} of the factored matrix is not a placeholder")
    ca = col[:beta]
    cg = col[beta + 1:]
    if beta > 0:
        v = solve_triangular(lo[:beta, :beta], ca, lower=True, unit_diagonal=True,
                             check_finite=False)
        lab = v / d[:beta]
        dbar = float(diag_value) - v @ lab
        lgb = cg - lo[beta + 1:, :beta] @ v
    else:
        lab = np.zeros(0)
        dbar = float(diag_value)
        lgb = cg.copy()
    if not abs(dbar) >= factors.ztol:
        raise ZeroPivotError(f"row addition at {beta} produced a zero diagonal")
    lgb /= dbar
    w = lgb * np.sqrt(abs(dbar))
    _rank1_inplace(lo[beta + 1:, beta + 1:], d[beta + 1:], w,
                   -np.sign(dbar), factors.ztol)
    lo[beta, :beta] = lab
    lo[beta + 1:, beta] = lgb
    d[beta] = dbar
    return factors


def row_delete(factors: LdlFactors, beta, diag_value) -> LdlFactors:
    """Zero row/column ``beta``, setting its diagonal to ``diag_value``."""
    n = factors.n
    beta = int(beta)
    if not 0 <= beta < n:
        raise ValueError("row index out of range")
    if diag_value == 0.0:
        raise ZeroPivotError("placeholder diagonal must be nonzero")
    lo, d = factors._lower, factors.d
    old_d = d[beta]
    lgb = lo[beta + 1:, beta].copy()
    lo[beta, :beta] = 0.0
    lo[beta + 1:, beta] = 0.0
    d[beta] = float(diag_value)
    w = lgb * np.sqrt(abs(old_d))
    _rank1_inplace(lo[beta + 1:, beta + 1:], d[beta + 1:], w,
                   np.sign(old_d), factors.ztol)
    return factors
