"""Right-hand sides of the generalized Prufer system and related identities.

Orientation used throughout::

    y = r sin(theta),    p (y' + s y) = -r cos(theta)

and the spectral parameter enters by replacing q with q - lam*omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .integrate import PruferPath
    from .problem import Problem

__all__ = [
    "KernelError",
    "PruferState",
    "RhsValue",
    "ResidualReport",
    "prufer_rhs",
    "phase_rhs",
    "lipschitz_bound",
    "bernoulli_gh",
    "reconstruct_solution",
    "equation_residual",
]


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class PruferState:
    x: float
    r: float
    theta: float  # continuous lift, never reduced mod 2*pi


@dataclass(frozen=True)
class RhsValue:
    dr: float
    dtheta: float


def _check_p(p: float) -> None:
    if not p > 0:
        raise KernelError(f"p must be positive, got {p!r}")


def prufer_rhs(
    state: PruferState,
    coeffs: tuple[float, float, float, float],
    lam: float,
) -> RhsValue:
    """Amplitude and phase derivatives for the nonlinear-A equation.

    ``coeffs`` is ``(p, s, q, omega)`` evaluated at ``state.x``.
    """
    p, s, q, w = coeffs
    _check_p(p)
    r, th = state.r, state.theta
    if not r > 0:
        raise KernelError(f"amplitude must be positive, got {r!r}")
    sn, cs = math.sin(th), math.cos(th)
    qe = q - lam * w
    dtheta = -cs * cs / p - s * sn * cs + qe * sn * sn - (s * r / p) * sn * sn * cs
    dr = r * (-(1.0 / p + qe) * sn * cs - s * sn * sn) + (s / p) * r * r * sn * cs * cs
    return RhsValue(dr=dr, dtheta=dtheta)


def phase_rhs(theta: float, r: float, p: float, s: float, q: float) -> float:
    """theta' with q already shifted by the spectral term (frozen r)."""
    sn, cs = math.sin(theta), math.cos(theta)
    return -cs * cs / p - s * sn * cs + q * sn * sn - (s * r / p) * sn * sn * cs


def lipschitz_bound(p: float, s: float, q: float, r: float) -> float:
    """Lipschitz constant in theta of the phase right-hand side at one x."""
    _check_p(p)
    return 1.0 / p + abs(s) + abs(q) + 3.0 * abs(s * r) / p


def bernoulli_gh(
    theta: float, p: float, s: float, q: float, omega: float = 1.0, lam: float = 0.0
) -> tuple[float, float]:
    """Coefficients of ``r' = r G + r^2 H`` along a known phase."""
    _check_p(p)
    sn, cs = math.sin(theta), math.cos(theta)
    g = -(1.0 / p + q - lam * omega) * sn * cs - s * sn * sn
    h = (s / p) * sn * cs * cs
    return g, h


def reconstruct_solution(state: PruferState, p: float) -> tuple[float, float]:
    """Return ``(y, u)`` with ``u = y' + s y``."""
    _check_p(p)
    if not state.r > 0:
        raise KernelError(f"amplitude must be positive, got {state.r!r}")
    return state.r * math.sin(state.theta), -(state.r / p) * math.cos(state.theta)


@dataclass(frozen=True)
class ResidualReport:
    lam: float
    form: str
    max_residual: float
    x_at_max: float
    grid_points: int


def equation_residual(
    path: "PruferPath", problem: "Problem", lam: float, points: int = 10_000
) -> ResidualReport:
    """Max pointwise residual of the original equation along a reconstructed y.

    The outer derivative of ``p (y' + s y)`` is a central difference on a
    uniform grid, so the residual is O(h^2) plus interpolation error.
    """
    from .problem import Form

    a, b = problem.a, problem.b
    if path.xs[0] > a + 1e-12 * (b - a) or path.xs[-1] < b - 1e-12 * (b - a):
        raise KernelError(
            f"path spans [{path.xs[0]}, {path.xs[-1]}], does not cover [{a}, {b}]"
        )
    xs = np.linspace(a, b, points)
    r, th = path.evaluate(xs)
    pv = problem.p.sample(xs)
    sv = problem.s.sample(xs)
    qv = problem.q.sample(xs)
    wv = problem.omega.sample(xs)
    y = r * np.sin(th)
    if problem.form is Form.NONLINEAR_A:
        pu = -r * np.cos(th)
        u = pu / pv
        middle = sv * y * u
    else:
        # path carries the classical phase of -(p y')' + Q y: p y' = -r cos(theta)
        pu = -r * np.cos(th) + pv * sv * y
        u = pu / pv
        middle = sv * pv * u
    h = xs[1] - xs[0]
    dpu = (pu[2:] - pu[:-2]) / (2.0 * h)
    res = -dpu + middle[1:-1] + (qv[1:-1] - lam * wv[1:-1]) * y[1:-1]
    k = int(np.argmax(np.abs(res)))
    return ResidualReport(
        lam=lam,
        form=problem.form.value,
        max_residual=float(abs(res[k])),
        x_at_max=float(xs[k + 1]),
        grid_points=points,
    )
