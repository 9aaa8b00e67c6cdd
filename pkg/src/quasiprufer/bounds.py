"""Variational lower/upper bounds for the n-th eigenvalue of the linear-B form.

    lower = n^2 pi^2 / (c (int 1/f)^2) + m,   0 < f <= p,  omega f < c
    upper = n^2 pi^2 / (D (int 1/h)^2) + M,   h >= p,      D = min omega h

with ``m``/``M`` the min/max of ``Q/omega``. Extrema are taken over a dense
uniform grid, not certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy.integrate import quad

from .problem import CoefficientFn, Form, Problem, ProblemError

__all__ = ["BoundsError", "BoundsResult", "lower_bound", "upper_bound", "eigen_bounds", "C_SLACK"]

C_SLACK = 1e-6
DEFAULT_GRID = 10_000


class BoundsError(ProblemError):
    """A comparison-function hypothesis fails on the grid."""


@dataclass
class BoundsResult:
    n: int
    lower: float
    upper: float
    m: float
    M: float
    c: float
    D: float
    int_inv_f: float
    int_inv_h: float
    caveats: list[str] = field(default_factory=list)


def _coef(value: Any, default: CoefficientFn) -> CoefficientFn:
    if value is None:
        return default
    if isinstance(value, CoefficientFn):
        return value
    if isinstance(value, (int, float)):
        return CoefficientFn.constant(value)
    return CoefficientFn.from_expr(str(value))


def _integral_of_reciprocal(fn: CoefficientFn, a: float, b: float) -> float:
    val, _ = quad(lambda x: 1.0 / fn(x), a, b, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def _q_over_omega(problem: Problem, xs: np.ndarray) -> np.ndarray:
    return problem.associated_q.sample(xs) / problem.omega.sample(xs)


def _caveats(problem: Problem) -> list[str]:
    if problem.form is Form.NONLINEAR_A and not problem.s_identically_zero:
        return ["bounds refer to the associated linear-B problem; the nonlinear-A spectrum is not covered"]
    return []


def _lower(problem, n, f, c, grid):
    xs = np.linspace(problem.a, problem.b, grid)
    f = _coef(f, problem.p)
    fv, pv, wv = f.sample(xs), problem.p.sample(xs), problem.omega.sample(xs)
    if np.any(fv <= 0):
        raise BoundsError("lower bound needs f > 0 on [a, b]")
    bad = np.nonzero(fv > pv * (1 + 1e-14))[0]
    if bad.size:
        raise BoundsError(f"lower bound needs f <= p; violated at x={float(xs[bad[0]])!r}")
    wf_max = float(np.max(wv * fv))
    if c is None:
        c = (1.0 + C_SLACK) * wf_max
    elif not c > wf_max:
        raise BoundsError(f"c={c!r} is not a strict upper bound for omega*f (max {wf_max!r})")
    m = float(np.min(_q_over_omega(problem, xs)))
    jf = _integral_of_reciprocal(f, problem.a, problem.b)
    return n * n * math.pi**2 / (c * jf * jf) + m, m, float(c), jf


def _upper(problem, n, h, grid):
    xs = np.linspace(problem.a, problem.b, grid)
    h = _coef(h, problem.p)
    hv, pv, wv = h.sample(xs), problem.p.sample(xs), problem.omega.sample(xs)
    bad = np.nonzero(hv < pv * (1 - 1e-14))[0]
    if bad.size:
        raise BoundsError(f"upper bound needs h >= p; violated at x={float(xs[bad[0]])!r}")
    D = float(np.min(wv * hv))
    if not D > 0:
        raise BoundsError(f"upper bound needs D = min(omega*h) > 0, got {D!r}")
    M = float(np.max(_q_over_omega(problem, xs)))
    jh = _integral_of_reciprocal(h, problem.a, problem.b)
    return n * n * math.pi**2 / (D * jh * jh) + M, M, D, jh


def lower_bound(
    problem: Problem, n: int, f: Any = None, c: Optional[float] = None, grid: int = DEFAULT_GRID
) -> float:
    """Lower bound on lam_n. Defaults: ``f = p``, ``c = (1 + 1e-6) max(omega p)``."""
    return _lower(problem, n, f, c, grid)[0]


def upper_bound(problem: Problem, n: int, h: Any = None, grid: int = DEFAULT_GRID) -> float:
    """Upper bound on lam_n. Default ``h = p``."""
    return _upper(problem, n, h, grid)[0]


def eigen_bounds(
    problem: Problem,
    n: int,
    f: Any = None,
    h: Any = None,
    c: Optional[float] = None,
    grid: int = DEFAULT_GRID,
) -> BoundsResult:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    lo, m, c_used, jf = _lower(problem, n, f, c, grid)
    up, M, D, jh = _upper(problem, n, h, grid)
    return BoundsResult(
        n=int(n), lower=lo, upper=up, m=m, M=M, c=c_used, D=D,
        int_inv_f=jf, int_inv_h=jh, caveats=_caveats(problem),
    )
