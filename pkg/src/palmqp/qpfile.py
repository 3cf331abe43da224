"""Line-oriented text format for problems and result documents.

A problem file is self-describing: dimension lines, triplet sections for the
matrices (upper triangle for the quadratic term), dense vector sections for
the linear term and bounds with ``inf``/``-inf`` literals, and optional warm
start sections. Values are serialized with ``repr`` so a read of a write
reproduces the problem bit-exactly. A matrix section may alternatively
reference a Matrix Market file (``Q mm hessian.mtx``), resolved relative to
the problem file.
"""

from __future__ import annotations

import os

import numpy as np

from .problem import QpProblem, SolveResult, SolveStatus
from .sparse import SparseMatrix, read_matrix_market


class ProblemFileError(ValueError):
    """Malformed problem or result document."""


def _fmt(v: float) -> str:
    if v == np.inf:
        return "inf"
    if v == -np.inf:
        return "-inf"
    return repr(float(v))


def write_problem(problem: QpProblem, target, warm=None) -> None:
    lines = ["palmqp problem 1\n", f"n {problem.n}\n", f"m {problem.m}\n"]
    rows, cols, vals = problem.Q.triplets()
    lines.append(f"Q {vals.size}\n")
    lines += [f"{r} {c} {_fmt(v)}\n" for r, c, v in zip(rows, cols, vals)]
    lines.append("q\n")
    lines += [_fmt(v) + "\n" for v in problem.q]
    rows, cols, vals = problem.A.triplets()
    lines.append(f"A {vals.size}\n")
    lines += [f"{r} {c} {_fmt(v)}\n" for r, c, v in zip(rows, cols, vals)]
    lines.append("l\n")
    lines += [_fmt(v) + "\n" for v in problem.l]
    lines.append("u\n")
    lines += [_fmt(v) + "\n" for v in problem.u]
    if warm is not None:
        x0, y0 = warm
        lines.append("warm_x\n")
        lines += [_fmt(v) + "\n" for v in x0]
        lines.append("warm_y\n")
        lines += [_fmt(v) + "\n" for v in y0]
    text = "".join(lines)
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def read_problem(source):
    """Returns (QpProblem, warm) where warm is None or an (x0, y0) pair."""
    if hasattr(source, "read"):
        text = source.read()
        base_dir = os.getcwd()
    else:
        with open(source) as fh:
            text = fh.read()
        base_dir = os.path.dirname(os.path.abspath(source))
    toks = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    it = iter(toks)

    def nxt():
        try:
            return next(it)
        except StopIteration:
            raise ProblemFileError("unexpected end of problem file") from None

    header = nxt()
    if not header.startswith("palmqp problem"):
        raise ProblemFileError(f"not a problem file: {header!r}")
    dims = {}
    for _ in range(2):
        k, v = nxt().split()
        dims[k] = int(v)
    if "n" not in dims or "m" not in dims:
        raise ProblemFileError("missing n/m dimension lines")
    n, m = dims["n"], dims["m"]

    def read_triplets(tag, nrows, ncols, symmetric):
        head = nxt().split()
        if head[0] != tag or len(head) not in (2, 3):
            raise ProblemFileError(f"expected '{tag} <count>' or '{tag} mm <file>'")
        if head[1] == "mm":
            if len(head) != 3:
                raise ProblemFileError(f"'{tag} mm' needs a file name")
            mat = read_matrix_market(os.path.join(base_dir, head[2]))
            if (mat.nrows, mat.ncols) != (nrows, ncols):
                raise ProblemFileError(
                    f"{tag} file is {mat.nrows}x{mat.ncols}, expected {nrows}x{ncols}")
            if symmetric and not mat.symmetric:
                raise ProblemFileError(
                    f"{tag} needs the symmetric Matrix Market kind")
            if not symmetric and mat.symmetric:
                mat = SparseMatrix.from_scipy(mat.to_scipy_full())
            return mat
        cnt = int(head[1])
        rows = np.empty(cnt, dtype=np.int64)
        cols = np.empty(cnt, dtype=np.int64)
        vals = np.empty(cnt)
        for i in range(cnt):
            r, c, v = nxt().split()
            rows[i], cols[i], vals[i] = int(r), int(c), float(v)
        return SparseMatrix.from_triplets(nrows, ncols, rows, cols, vals,
                                          symmetric=symmetric)

    def read_vector(tag, size):
        head = nxt()
        if head != tag:
            raise ProblemFileError(f"expected section {tag!r}, found {head!r}")
        return np.array([float(nxt()) for _ in range(size)])

    qmat = read_triplets("Q", n, n, True)
    qvec = read_vector("q", n)
    amat = read_triplets("A", m, n, False)
    lvec = read_vector("l", m)
    uvec = read_vector("u", m)
    warm = None
    rest = list(it)
    if rest:
        if rest[0] != "warm_x" or len(rest) != 2 + n + m or rest[1 + n] != "warm_y":
            raise ProblemFileError("malformed warm start section")
        x0 = np.array([float(v) for v in rest[1:1 + n]])
        y0 = np.array([float(v) for v in rest[2 + n:]])
        warm = (x0, y0)
    return QpProblem(qmat, qvec, amat, lvec, uvec), warm


def write_result(result: SolveResult, target) -> None:
    lines = ["palmqp result 1\n",
             f"status {result.status.value}\n",
             f"objective {_fmt(result.objective)}\n",
             f"prim_res {_fmt(result.prim_res)}\n",
             f"dual_res {_fmt(result.dual_res)}\n",
             f"outer_iterations {result.info.outer_iterations}\n",
             f"newton_iterations {result.info.newton_iterations}\n",
             f"factorizations {result.info.factorizations}\n",
             f"rank_updates {result.info.rank_updates}\n",
             f"runtime {_fmt(result.info.runtime)}\n",
             f"linsys {result.info.linsys or '-'}\n",
             "x " + " ".join(_fmt(v) for v in result.x) + "\n",
             "y " + " ".join(_fmt(v) for v in result.y) + "\n"]
    if result.certificate is not None:
        lines.append("certificate " + " ".join(_fmt(v) for v in result.certificate) + "\n")
    text = "".join(lines)
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)


def read_result(source) -> dict:
    """Parse a result document into a plain dict (vectors as arrays)."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("palmqp result"):
        raise ProblemFileError("not a result document")
    out = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key in ("x", "y", "certificate"):
            out[key] = np.array([float(v) for v in rest.split()]) if rest.strip() \
                else np.zeros(0)
        elif key in ("status", "linsys"):
            out[key] = rest.strip()
        elif key in ("outer_iterations", "newton_iterations", "factorizations",
                     "rank_updates"):
            out[key] = int(rest)
        else:
            out[key] = float(rest)
    if "status" in out:
        out["status_enum"] = SolveStatus(out["status"])
    return out
