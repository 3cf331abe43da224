"""Proximal augmented Lagrangian solver for sparse convex and nonconvex QPs."""

from .sparse import SparseMatrix, SparseFormatError, read_matrix_market, write_matrix_market
from .ordering import compute_ordering
from .ldl import LdlFactors, ZeroPivotError, ldl_factorize, ldl_solve, rank1_update, row_add, row_delete
from .eigen import EigEstimate, min_eigenvalue, small_generalized_symmetric_eig
from .scaling import ScalingData, ruiz_equilibrate, scale_problem, unscale_solution
from .problem import QpProblem, Settings, SolveResult, SolveStatus
from .solver import Solver, solve
from .verify import verify_termination, verify_primal_infeasibility, verify_dual_infeasibility

__all__ = [
    "SparseMatrix", "SparseFormatError", "read_matrix_market", "write_matrix_market",
    "compute_ordering",
    "LdlFactors", "ZeroPivotError", "ldl_factorize", "ldl_solve",
    "rank1_update", "row_add", "row_delete",
    "EigEstimate", "min_eigenvalue", "small_generalized_symmetric_eig",
    "ScalingData", "ruiz_equilibrate", "scale_problem", "unscale_solution",
    "QpProblem", "Settings", "SolveResult", "SolveStatus",
    "Solver", "solve",
    "verify_termination", "verify_primal_infeasibility", "verify_dual_infeasibility",
]

__version__ = "0.1.0"
