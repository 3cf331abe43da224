"""Problem data, solver settings and result records."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields

import numpy as np

from .sparse import SparseMatrix


class SolveStatus(enum.Enum):
    SOLVED = "solved"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    MAX_ITER = "max_iter"
    TIME_LIMIT = "time_limit"
    STALLED = "stalled"


#: Statuses that count as successful outcomes (an answer was produced).
ANSWER_STATUSES = (SolveStatus.SOLVED, SolveStatus.PRIMAL_INFEASIBLE,
                   SolveStatus.DUAL_INFEASIBLE)


@dataclass
class QpProblem:
    """minimize 0.5 x'Qx + q'x  subject to  l <= Ax <= u."""

    Q: SparseMatrix
    q: np.ndarray
    A: SparseMatrix
    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=np.float64)
        self.l = np.asarray(self.l, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        n = self.Q.nrows
        m = self.A.nrows
        if not self.Q.symmetric or self.Q.ncols != n:
            raise ValueError("Q must be square and symmetric-flagged")
        if self.A.ncols != n:
            raise ValueError(f"A has {self.A.ncols} columns, expected {n}")
        if self.q.shape != (n,):
            raise ValueError("q length mismatch")
        if self.l.shape != (m,) or self.u.shape != (m,):
            raise ValueError("bound length mismatch")
        if np.any(self.l > self.u):
            raise ValueError("found l_i > u_i")
        if np.any(self.l == np.inf) or np.any(self.u == -np.inf):
            raise ValueError("l_i must be < +inf and u_i > -inf")
        if not (np.all(np.isfinite(self.q))):
            raise ValueError("q must be finite")

    @property
    def n(self) -> int:
        return self.Q.nrows

    @property
    def m(self) -> int:
        return self.A.nrows

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ self.Q.matvec(x) + self.q @ x)

    @classmethod
    def from_dense(cls, Q, q, A, l, u):
        Qm = SparseMatrix.from_dense(np.asarray(Q, dtype=np.float64), symmetric=True)
        Am = SparseMatrix.from_dense(np.atleast_2d(np.asarray(A, dtype=np.float64)))
        return cls(Qm, q, Am, l, u)


@dataclass
class Settings:
    """Solver tunables; defaults follow the reference parameter table."""

    eps_abs: float = 1e-4
    eps_rel: float = 1e-4
    delta_abs0: float = 1.0
    delta_rel0: float = 1.0
    rho: float = 0.1
    sigma_init: float = 20.0
    sigma_max: float = 1e9
    delta: float = 100.0
    theta: float = 0.25
    gamma_init: float = 1e7
    gamma_upd: float = 10.0
    gamma_max: float = 1e7
    scaling_iters: int = 10
    eps_pinf: float = 1e-5
    eps_dinf: float = 1e-5
    max_rank_update: int = 160
    max_rank_update_fraction: float = 0.1
    nonconvex: bool = False
    linsys: str = "auto"            # auto | kkt | schur
    max_outer_iter: int = 10000
    max_total_newton_iter: int = 100000
    time_limit_seconds: float | None = None
    inner_max_iter: int = 100
    warm_start: bool = True
    enable_proximal_update: bool = False
    eigen_eps: float = 1e-5
    eigen_max_iter: int = 10000
    log_iterates: bool = False

    def __post_init__(self):
        for name in ("eps_abs", "delta_abs0", "eps_pinf", "eps_dinf",
                     "sigma_init", "sigma_max", "gamma_init", "gamma_upd",
                     "gamma_max", "eigen_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        # relative tolerances may be zero (purely absolute stopping)
        if self.eps_rel < 0 or self.delta_rel0 < 0:
            raise ValueError("relative tolerances must be nonnegative")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.delta <= 1:
            raise ValueError("delta must exceed 1")
        if self.sigma_max < self.sigma_init:
            raise ValueError("sigma_max must be >= sigma_init")
        if self.scaling_iters < 0:
            raise ValueError("scaling_iters must be nonnegative")
        if self.linsys not in ("auto", "kkt", "schur"):
            raise ValueError("linsys must be one of auto, kkt, schur")

    def replace(self, **kw) -> "Settings":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return Settings(**vals)


@dataclass
class SolveInfo:
    outer_iterations: int = 0
    newton_iterations: int = 0
    factorizations: int = 0
    rank_updates: int = 0
    runtime: float = 0.0
    sgm_runtime: float = 0.0
    linsys: str = ""
    sigma_unscaled: np.ndarray | None = None
    iterates: list = field(default_factory=list)
    audit: list = field(default_factory=list)


@dataclass
class SolveResult:
    status: SolveStatus
    x: np.ndarray
    y: np.ndarray
    objective: float
    prim_res: float
    dual_res: float
    certificate: np.ndarray | None
    info: SolveInfo

    @property
    def solved(self) -> bool:
        return self.status is SolveStatus.SOLVED
