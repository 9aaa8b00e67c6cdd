"""Generalized Prufer-phase spectral analysis for quasi-derivative Sturm-Liouville problems."""

from .bounds import BoundsResult, eigen_bounds, lower_bound, upper_bound
from .coeffexpr import ExprDomainError, ExprSyntaxError, compile_expr, eval_expr, parse_expr, to_source
from .integrate import PathStatus, PruferPath, detect_pi_crossings, integrate_prufer
from .kernel import PruferState, equation_residual, lipschitz_bound, prufer_rhs
from .oscillation import check_interlacing, solution_zeros, zero_monotonicity
from .problem import CoefficientFn, Form, Problem, ProblemError, build_problem, make_problem
from .selfadjoint import associated_Q, fd_oracle_eigenvalues, linear_eigen_shoot
from .shooting import EigenFailure, EigenResult, eigenvalues_up_to, find_eigenvalue

__version__ = "0.1.0"

__all__ = [
    "BoundsResult",
    "CoefficientFn",
    "EigenFailure",
    "EigenResult",
    "ExprDomainError",
    "ExprSyntaxError",
    "Form",
    "PathStatus",
    "Problem",
    "ProblemError",
    "PruferPath",
    "PruferState",
    "associated_Q",
    "build_problem",
    "check_interlacing",
    "compile_expr",
    "detect_pi_crossings",
    "eigen_bounds",
    "eigenvalues_up_to",
    "equation_residual",
    "eval_expr",
    "fd_oracle_eigenvalues",
    "find_eigenvalue",
    "integrate_prufer",
    "linear_eigen_shoot",
    "lipschitz_bound",
    "lower_bound",
    "make_problem",
    "parse_expr",
    "prufer_rhs",
    "solution_zeros",
    "to_source",
    "upper_bound",
    "zero_monotonicity",
]
