"""Linear (self-adjoint) pathway and the finite-difference eigenvalue oracle.

The linear-B operator

    -(p (y' + s y))' + s p (y' + s y) + q y

expands to ``-(p y')' + Q y`` with ``Q = q - (p s)' + p s^2``. The
exponential change of variables ``v = exp(int s) y`` does not reduce the
nonlinear-A operator to this form, so everything here applies to linear-B
only (bounds on nonlinear-A problems use the associated linear-B problem).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from .problem import Form, Problem, ProblemError

if TYPE_CHECKING:
    from .shooting import EigenResult

__all__ = [
    "AssociatedQ",
    "OracleResult",
    "OracleError",
    "associated_Q",
    "linear_eigen_shoot",
    "fd_matrix",
    "sturm_count",
    "tridiagonal_eigenvalues",
    "fd_oracle_eigenvalues",
]

MIN_TABLE_SAMPLES = 10


class OracleError(RuntimeError):
    """Inconsistent inertia counts: an implementation fault, not a math condition."""


class AssociatedQ:
    """Evaluator for ``Q(x) = q - (p s)' + p s^2``."""

    def __init__(self, problem: Problem):
        self.problem = problem
        p, s, q = problem.p, problem.s, problem.q
        a, b = problem.a, problem.b
        if problem.s_identically_zero:
            self.derivative_source = "analytic"
            self.h_d = None
            self._dps = lambda x: 0.0
        elif p.derivative is not None and s.derivative is not None:
            self.derivative_source = "analytic"
            self.h_d = None
            dp, ds = p.derivative, s.derivative
            self._dps = lambda x: dp(x) * s(x) + p(x) * ds(x)
        else:
            for fn, name in ((p, "p"), (s, "s")):
                if fn.is_table and fn.derivative is None and len(fn.table[0]) < MIN_TABLE_SAMPLES:
                    raise ProblemError(
                        f"cannot differentiate table coefficient {name!r}: "
                        f"{len(fn.table[0])} samples, need at least {MIN_TABLE_SAMPLES}"
                    )
            self.derivative_source = "numeric"
            hd = (b - a) * 1e-5
            self.h_d = hd

            def ps(x):
                return p(x) * s(x)

            def dps(x):
                if x - hd < a:
                    return (-3.0 * ps(x) + 4.0 * ps(x + hd) - ps(x + 2 * hd)) / (2 * hd)
                if x + hd > b:
                    return (3.0 * ps(x) - 4.0 * ps(x - hd) + ps(x - 2 * hd)) / (2 * hd)
                return (ps(x + hd) - ps(x - hd)) / (2 * hd)

            self._dps = dps
        self._p, self._s, self._q = p, s, q

    def __call__(self, x: float) -> float:
        sv = self._s(x)
        return self._q(x) - self._dps(x) + self._p(x) * sv * sv

    def sample(self, xs: np.ndarray) -> np.ndarray:
        return np.fromiter((self(float(x)) for x in xs), dtype=float, count=len(xs))


def associated_Q(problem: Problem) -> AssociatedQ:
    return AssociatedQ(problem)


def linear_eigen_shoot(problem: Problem, n: int, **kwargs) -> "EigenResult":
    """Classical Prufer shooting for the n-th eigenvalue of a linear-B problem."""
    from .shooting import find_eigenvalue

    if problem.form is not Form.LINEAR_B:
        raise ProblemError("linear_eigen_shoot requires a linear-B problem")
    return find_eigenvalue(problem, n, **kwargs)


# ---------------------------------------------------------------------------
# finite-difference oracle


def fd_matrix(problem: Problem, mesh: int) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric tridiagonal ``(diag, offdiag)`` for ``W^-1/2 A W^-1/2``.

    ``A`` is the conservative three-point discretization of
    ``-(p v')' + Q v`` on ``mesh`` uniform intervals with p at half points;
    ``W = diag(omega)``.
    """
    a, b = problem.a, problem.b
    h = (b - a) / mesh
    x = a + h * np.arange(1, mesh)
    xh = a + h * (np.arange(mesh) + 0.5)
    ph = problem.p.sample(xh)
    qv = problem.associated_q.sample(x)
    wv = problem.omega.sample(x)
    h2 = h * h
    diag = ((ph[:-1] + ph[1:]) / h2 + qv) / wv
    off = -ph[1:-1] / (h2 * np.sqrt(wv[:-1] * wv[1:]))
    return diag, off


def sturm_count(diag: list[float], off_sq: list[float], sigma: float) -> int:
    """Number of eigenvalues strictly below ``sigma`` (LDL^T inertia)."""
    count = 0
    d = diag[0] - sigma
    if d < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, len(diag)):
        if d == 0.0:
            d = tiny
        d = diag[i] - sigma - off_sq[i - 1] / d
        if d < 0.0:
            count += 1
    return count


def tridiagonal_eigenvalues(
    diag: np.ndarray, off: np.ndarray, count: int, abstol: float = 1e-12
) -> list[float]:
    """Smallest ``count`` eigenvalues by Sturm-sequence bisection."""
    dl = [float(v) for v in diag]
    e2 = [float(v) * float(v) for v in off]
    m = len(dl)
    if not 1 <= count <= m:
        raise ValueError(f"count must be in [1, {m}], got {count}")
    ae = np.abs(np.concatenate(([0.0], np.asarray(off, float)))) + np.abs(
        np.concatenate((np.asarray(off, float), [0.0]))
    )
    g_lo = float(np.min(np.asarray(diag) - ae))
    g_hi = float(np.max(np.asarray(diag) + ae))
    pad = 1e-12 * max(1.0, abs(g_lo), abs(g_hi))
    g_lo -= pad
    g_hi += pad

    # an upper end that encloses the first `count` eigenvalues, found by doubling
    width = max(1.0, abs(g_lo))
    upper = g_lo + width
    while upper < g_hi and sturm_count(dl, e2, upper) < count:
        width *= 2.0
        upper = g_lo + width
    upper = min(upper, g_hi)

    out = []
    lo_k = g_lo
    for k in range(1, count + 1):
        lo, hi = lo_k, upper
        while hi - lo > abstol and hi - lo > 4e-16 * max(abs(lo), abs(hi)):
            mid = 0.5 * (lo + hi)
            if sturm_count(dl, e2, mid) >= k:
                hi = mid
            else:
                lo = mid
        val = 0.5 * (lo + hi)
        if out and val < out[-1]:
            raise OracleError(f"inertia counts inconsistent: eigenvalue {k} below eigenvalue {k - 1}")
        out.append(val)
        lo_k = lo
    return out


@dataclass(frozen=True)
class OracleResult:
    meshes: tuple[int, int]
    raw: tuple[list[float], list[float]]
    extrapolated: list[float]
    order_mesh: int
    raw_order_mesh: list[float]
    order: float
    orders: list[float]


def fd_oracle_eigenvalues(problem: Problem, N: int, mesh: int = 2000) -> OracleResult:
    """First ``N`` eigenvalues from meshes ``mesh`` and ``2*mesh``, Richardson-extrapolated.

    A third, coarser mesh (``mesh // 2``) gives the observed convergence
    order; it does not enter the extrapolated values.
    """
    if problem.form is not Form.LINEAR_B:
        raise ProblemError("the finite-difference oracle requires a linear-B problem")
    if mesh < 100:
        raise ValueError(f"mesh must be at least 100, got {mesh}")
    if not 1 <= N < mesh / 10:
        raise ValueError(f"need 1 <= N < mesh/10, got N={N}, mesh={mesh}")

    def solve(m):
        return tridiagonal_eigenvalues(*fd_matrix(problem, m), N)

    coarse = solve(mesh // 2)
    lam_h = solve(mesh)
    lam_h2 = solve(2 * mesh)
    extrap = [(4.0 * f - c) / 3.0 for c, f in zip(lam_h, lam_h2)]
    orders = []
    for c0, c1, c2 in zip(coarse, lam_h, lam_h2):
        num, den = c0 - c1, c1 - c2
        orders.append(math.log2(num / den) if den != 0 and num / den > 0 else float("nan"))
    for i in range(1, len(extrap)):
        if not extrap[i] > extrap[i - 1]:
            raise OracleError("extrapolated eigenvalues are not strictly increasing")
    finite = [o for o in orders if math.isfinite(o)]
    return OracleResult(
        meshes=(mesh, 2 * mesh),
        raw=(lam_h, lam_h2),
        extrapolated=extrap,
        order_mesh=mesh // 2,
        raw_order_mesh=coarse,
        order=float(np.median(finite)) if finite else float("nan"),
        orders=orders,
    )
