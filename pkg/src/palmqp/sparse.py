"""Compressed sparse column matrices and Matrix Market coordinate I/O.

Matrices are stored in CSC form. Symmetric matrices keep the upper triangle
only and are flagged as such; operations that need the full pattern expand
on demand. Instances are treated as immutable once built, which makes the
cached scipy views safe to share across threads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class SparseFormatError(ValueError):
    """Malformed CSC structure or Matrix Market content."""


@dataclass
class SparseMatrix:
    """CSC matrix: ``values[colptr[j]:colptr[j+1]]`` hold column j."""

    nrows: int
    ncols: int
    colptr: np.ndarray
    rowidx: np.ndarray
    values: np.ndarray
    symmetric: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.colptr = np.ascontiguousarray(self.colptr, dtype=np.int64)
        self.rowidx = np.ascontiguousarray(self.rowidx, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.symmetric and self.nrows != self.ncols:
            raise SparseFormatError("symmetric matrix must be square")
        if self.colptr.shape != (self.ncols + 1,):
            raise SparseFormatError("colptr must have length ncols+1")
        if self.colptr[0] != 0 or self.colptr[-1] != self.values.size:
            raise SparseFormatError("colptr endpoints inconsistent with values")
        if np.any(np.diff(self.colptr) < 0):
            raise SparseFormatError("colptr must be nondecreasing")
        if self.rowidx.shape != self.values.shape:
            raise SparseFormatError("rowidx and values lengths differ")
        for j in range(self.ncols):
            rows = self.rowidx[self.colptr[j]:self.colptr[j + 1]]
            if rows.size:
                if rows[0] < 0 or rows[-1] >= self.nrows:
                    raise SparseFormatError(f"row index out of range in column {j}")
                if np.any(np.diff(rows) <= 0):
                    raise SparseFormatError(f"row indices not strictly increasing in column {j}")
                if self.symmetric and rows[-1] > j:
                    raise SparseFormatError(f"symmetric matrix has entry below diagonal in column {j}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_triplets(cls, nrows, ncols, rows, cols, vals, symmetric=False):
        """Build from COO triplets; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if symmetric and np.any(rows > cols):
            raise SparseFormatError("symmetric triplets must lie in the upper triangle")
        m = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsc()
        m.sum_duplicates()
        m.sort_indices()
        return cls(nrows, ncols, m.indptr, m.indices, m.data, symmetric=symmetric)

    @classmethod
    def from_dense(cls, arr, symmetric=False, drop_tol=0.0):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise SparseFormatError("dense input must be 2-d")
        if symmetric:
            arr = np.triu(arr)
        rows, cols = np.nonzero(np.abs(arr) > drop_tol)
        return cls.from_triplets(arr.shape[0], arr.shape[1], rows, cols,
                                 arr[rows, cols], symmetric=symmetric)

    @classmethod
    def from_scipy(cls, m, symmetric=False):
        m = sp.csc_matrix(m)
        m.sort_indices()
        if symmetric:
            m = sp.triu(m, format="csc")
            m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data, symmetric=symmetric)

    @classmethod
    def eye(cls, n):
        return cls(n, n, np.arange(n + 1), np.arange(n), np.ones(n))

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(nrows, ncols, np.zeros(ncols + 1, dtype=np.int64),
                   np.zeros(0, dtype=np.int64), np.zeros(0))

    # -- views -------------------------------------------------------------

    @property
    def nnz(self):
        return self.values.size

    def to_scipy(self):
        """CSC view of the stored entries (upper triangle if symmetric)."""
        if "csc" not in self._cache:
            self._cache["csc"] = sp.csc_matrix(
                (self.values, self.rowidx, self.colptr), shape=(self.nrows, self.ncols))
        return self._cache["csc"]

    def to_scipy_full(self):
        """CSC view with symmetric storage expanded to both triangles."""
        if "full" not in self._cache:
            m = self.to_scipy()
            if self.symmetric:
                upper = sp.triu(m, k=1)
                m = (m + upper.T).tocsc()
            self._cache["full"] = m
        return self._cache["full"]

    def to_scipy_full_csr(self):
        if "full_csr" not in self._cache:
            self._cache["full_csr"] = self.to_scipy_full().tocsr()
        return self._cache["full_csr"]

    def to_dense(self):
        return self.to_scipy_full().toarray()

    def matvec(self, x):
        return self.to_scipy_full() @ x

    def rmatvec(self, y):
        return self.to_scipy_full().T @ y

    def triplets(self):
        """(rows, cols, values) of the stored entries, column-major order."""
        cols = np.repeat(np.arange(self.ncols), np.diff(self.colptr))
        return self.rowidx.copy(), cols, self.values.copy()


# -- Matrix Market coordinate format ---------------------------------------


def write_matrix_market(mat, target):
    """Write in coordinate format; symmetric matrices use the symmetric kind."""
    kind = "symmetric" if mat.symmetric else "general"
    rows, cols, vals = mat.triplets()
    if mat.symmetric:
        # Matrix Market symmetric files carry the lower triangle.
        rows, cols = cols, rows
    lines = [f"%%MatrixMarket matrix coordinate real {kind}\n",
             f"{mat.nrows} {mat.ncols} {vals.size}\n"]
    lines += [f"{r + 1} {c + 1} {float(v)!r}\n" for r, c, v in zip(rows, cols, vals)]
    text = "".join(lines)
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def read_matrix_market(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = iter(text.splitlines())
    try:
        header = next(lines)
    except StopIteration:
        raise SparseFormatError("empty Matrix Market input") from None
    parts = header.lower().split()
    if (len(parts) != 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix"
            or parts[2] != "coordinate" or parts[3] != "real"):
        raise SparseFormatError(f"unsupported Matrix Market header: {header.strip()}")
    kind = parts[4]
    if kind not in ("general", "symmetric"):
        raise SparseFormatError(f"unsupported Matrix Market kind: {kind}")
    for line in lines:
        line = line.strip()
        if line and not line.startswith("%"):
            dims = line.split()
            break
    else:
        raise SparseFormatError("missing size line")
    nrows, ncols, nnz = int(dims[0]), int(dims[1]), int(dims[2])
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    k = 0
    for line in lines:
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        r, c, v = line.split()
        rows[k], cols[k], vals[k] = int(r) - 1, int(c) - 1, float(v)
        k += 1
    if k != nnz:
        raise SparseFormatError(f"expected {nnz} entries, found {k}")
    if kind == "symmetric":
        if np.any(rows < cols):
            raise SparseFormatError("symmetric file must store the lower triangle")
        rows, cols = cols, rows
    return SparseMatrix.from_triplets(nrows, ncols, rows, cols, vals,
                                      symmetric=(kind == "symmetric"))


def mm_loads(text):
    return read_matrix_market(io.StringIO(text))


def mm_dumps(mat):
    buf = io.StringIO()
    write_matrix_market(mat, buf)
    return buf.getvalue()
