"""Adaptive Dormand-Prince 5(4) integration of the coupled (r, theta) system.

The integrator is written for the two-component system with plain floats;
this is several times faster than a general vectorized solver for the
thousands of short integrations a shooting scan performs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .kernel import lipschitz_bound
from .problem import Form, Problem

__all__ = [
    "PathStatus",
    "PruferPath",
    "ZeroList",
    "DEFAULT_TOL",
    "integrate_prufer",
    "detect_pi_crossings",
    "effective_coefficients",
]

DEFAULT_TOL = (1e-11, 1e-11)
BLOWUP_FACTOR = 1e12
MAX_STEPS = 1_000_000

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFE = 0.9
FAC_MIN, FAC_MAX = 0.2, 10.0
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75


class PathStatus(str, enum.Enum):
    COMPLETE = "complete"
    BLOW_UP = "blow-up"
    STEP_FAILURE = "step-failure"


@dataclass
class PruferPath:
    """Trajectory of (r, theta) at fixed lam with dense output.

    ``xs``, ``rs``, ``thetas`` hold the accepted step endpoints; ``dense``
    has shape ``(steps, 5, 2)`` (continuous-extension coefficients for r and
    theta on each step).
    """

    lam: float
    xs: np.ndarray
    rs: np.ndarray
    thetas: np.ndarray
    dense: np.ndarray
    tol: tuple[float, float]
    status: PathStatus
    theta0: float
    r0: float
    failure_x: Optional[float] = None
    rhs_evaluations: int = 0
    rejected_steps: int = 0

    @property
    def complete(self) -> bool:
        return self.status is PathStatus.COMPLETE

    @property
    def theta_end(self) -> float:
        return float(self.thetas[-1])

    @property
    def r_end(self) -> float:
        return float(self.rs[-1])

    def _interp(self, idx: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x0 = self.xs[idx]
        h = self.xs[idx + 1] - x0
        t = (x - x0) / h
        t1 = 1.0 - t
        c = self.dense[idx]  # (m, 5, 2)
        out = c[:, 0] + t[:, None] * (
            c[:, 1] + t1[:, None] * (c[:, 2] + t[:, None] * (c[:, 3] + t1[:, None] * c[:, 4]))
        )
        return out[:, 0], out[:, 1]

    def evaluate(self, x):
        """Dense-output ``(r, theta)`` at scalar or array ``x``."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.xs[0], self.xs[-1]
        span = hi - lo
        if np.any(xa < lo - 1e-12 * span) or np.any(xa > hi + 1e-12 * span):
            raise ValueError(f"x outside integrated range [{lo}, {hi}]")
        if len(self.xs) < 2:
            r = np.full(xa.shape, self.rs[0])
            th = np.full(xa.shape, self.thetas[0])
        else:
            idx = np.clip(np.searchsorted(self.xs, xa, side="right") - 1, 0, len(self.xs) - 2)
            r, th = self._interp(idx, np.clip(xa, lo, hi))
        if np.ndim(x) == 0:
            return float(r[0]), float(th[0])
        return r, th


@dataclass
class ZeroList:
    """Points where theta reaches ``theta0 - k*pi``; k counts from 1."""

    xs: list[float] = field(default_factory=list)
    ks: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.xs)

    def __iter__(self):
        return iter(zip(self.xs, self.ks))

    def interior(self, b: float, rel: float = 1e-8, span: float = 1.0) -> list[float]:
        """Crossings strictly inside the interval (terminal zero excluded)."""
        cut = b - rel * span
        return [x for x in self.xs if x < cut]


def effective_coefficients(problem: Problem):
    """Coefficient callables ``(p, s, q, omega)`` driving the phase system.

    For linear-B the system is the classical one for ``-(p y')' + Q y``, so s
    is dropped and q is replaced by the associated coefficient Q.
    """
    if problem.form is Form.LINEAR_B:
        return problem.p, None, problem.associated_q, problem.omega
    return problem.p, (None if problem.s_identically_zero else problem.s), problem.q, problem.omega


def _make_rhs(problem: Problem, lam: float) -> Callable[[float, float, float], tuple[float, float]]:
    P, S, Q, W = effective_coefficients(problem)
    sin, cos = math.sin, math.cos
    if S is None:
        def rhs(x, r, th):
            pv = P(x)
            qe = Q(x) - lam * W(x)
            sn = sin(th)
            cs = cos(th)
            return (
                -r * (1.0 / pv + qe) * sn * cs,
                -cs * cs / pv + qe * sn * sn,
            )
    else:
        def rhs(x, r, th):
            pv = P(x)
            sv = S(x)
            qe = Q(x) - lam * W(x)
            sn = sin(th)
            cs = cos(th)
            sp = sv / pv
            return (
                r * (-(1.0 / pv + qe) * sn * cs - sv * sn * sn) + sp * r * r * sn * cs * cs,
                -cs * cs / pv - sv * sn * cs + qe * sn * sn - sp * r * sn * sn * cs,
            )
    return rhs


def integrate_prufer(
    problem: Problem,
    lam: float,
    init: Optional[tuple[float, float]] = None,
    tol: tuple[float, float] = DEFAULT_TOL,
) -> PruferPath:
    """Integrate the Prufer system from ``a`` to ``b`` at spectral parameter ``lam``.

    ``init`` is ``(theta0, r0)`` and defaults to the problem's. Blow-up of r
    (beyond ``1e12 * r0``) and step-size underflow are reported through
    ``path.status``, not raised.
    """
    atol, rtol = float(tol[0]), float(tol[1])
    for v in (atol, rtol):
        if not (1e-13 <= v <= 1e-2):
            raise ValueError(f"tolerances must lie in [1e-13, 1e-2], got {tol!r}")
    th, r = (problem.theta0, problem.r0) if init is None else (float(init[0]), float(init[1]))
    if not r > 0:
        raise ValueError(f"initial amplitude must be positive, got {r!r}")

    a, b = problem.a, problem.b
    span = b - a
    f = _make_rhs(problem, lam)
    P, S, Q, W = effective_coefficients(problem)
    s_a = 0.0 if S is None else S(a)
    lip = lipschitz_bound(P(a), s_a, Q(a) - lam * W(a), r)
    h = min(0.1 * span, 1.0 / lip)
    h_min = 1e-14 * span
    r_limit = BLOWUP_FACTOR * r
    theta0, r0 = th, r

    x = a
    xs, rs, ths, dense = [x], [r], [th], []
    k1r, k1t = f(x, r, th)
    nfev = 1
    rejected = 0
    facold = 1e-4
    status = PathStatus.COMPLETE
    failure_x = None
    last = False

    while x < b:
        if len(xs) > MAX_STEPS:
            status, failure_x = PathStatus.STEP_FAILURE, x
            break
        if h < h_min:
            status, failure_x = PathStatus.STEP_FAILURE, x
            break
        if x + 1.01 * h >= b:
            h = b - x
            last = True

        k2r, k2t = f(x + C2 * h, r + h * A21 * k1r, th + h * A21 * k1t)
        k3r, k3t = f(x + C3 * h, r + h * (A31 * k1r + A32 * k2r), th + h * (A31 * k1t + A32 * k2t))
        k4r, k4t = f(
            x + C4 * h,
            r + h * (A41 * k1r + A42 * k2r + A43 * k3r),
            th + h * (A41 * k1t + A42 * k2t + A43 * k3t),
        )
        k5r, k5t = f(
            x + C5 * h,
            r + h * (A51 * k1r + A52 * k2r + A53 * k3r + A54 * k4r),
            th + h * (A51 * k1t + A52 * k2t + A53 * k3t + A54 * k4t),
        )
        xph = x + h
        k6r, k6t = f(
            xph,
            r + h * (A61 * k1r + A62 * k2r + A63 * k3r + A64 * k4r + A65 * k5r),
            th + h * (A61 * k1t + A62 * k2t + A63 * k3t + A64 * k4t + A65 * k5t),
        )
        r1 = r + h * (A71 * k1r + A73 * k3r + A74 * k4r + A75 * k5r + A76 * k6r)
        th1 = th + h * (A71 * k1t + A73 * k3t + A74 * k4t + A75 * k5t + A76 * k6t)
        k7r, k7t = f(xph, r1, th1)
        nfev += 6

        er = h * (E1 * k1r + E3 * k3r + E4 * k4r + E5 * k5r + E6 * k6r + E7 * k7r)
        et = h * (E1 * k1t + E3 * k3t + E4 * k4t + E5 * k5t + E6 * k6t + E7 * k7t)
        sc_r = atol + rtol * max(abs(r), abs(r1))
        sc_t = atol + rtol * max(abs(th), abs(th1))
        err = math.sqrt(0.5 * ((er / sc_r) ** 2 + (et / sc_t) ** 2))

        if not (math.isfinite(err) and math.isfinite(r1) and r1 > 0):
            h *= 0.25
            last = False
            rejected += 1
            continue

        fac11 = err ** EXPO1
        fac = fac11 / facold ** BETA
        fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
        if err <= 1.0:
            facold = max(err, 1e-4)
            ydr, ydt = r1 - r, th1 - th
            bsr, bst = h * k1r - ydr, h * k1t - ydt
            dense.append((
                (r, th),
                (ydr, ydt),
                (bsr, bst),
                (ydr - h * k7r - bsr, ydt - h * k7t - bst),
                (
                    h * (D1 * k1r + D3 * k3r + D4 * k4r + D5 * k5r + D6 * k6r + D7 * k7r),
                    h * (D1 * k1t + D3 * k3t + D4 * k4t + D5 * k5t + D6 * k6t + D7 * k7t),
                ),
            ))
            x = b if last else xph
            r, th = r1, th1
            k1r, k1t = k7r, k7t
            xs.append(x)
            rs.append(r)
            ths.append(th)
            if r > r_limit:
                status, failure_x = PathStatus.BLOW_UP, x
                break
            h = h / fac
        else:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            last = False
            rejected += 1

    return PruferPath(
        lam=float(lam),
        xs=np.asarray(xs),
        rs=np.asarray(rs),
        thetas=np.asarray(ths),
        dense=np.asarray(dense, dtype=float).reshape(-1, 5, 2),
        tol=(atol, rtol),
        status=status,
        theta0=theta0,
        r0=r0,
        failure_x=failure_x,
        rhs_evaluations=nfev,
        rejected_steps=rejected,
    )


def detect_pi_crossings(
    path: PruferPath, xtol_rel: float = 1e-10, terminal_tol: float = 1e-9
) -> ZeroList:
    """Locate each x where the continuous phase reaches ``theta0 - k*pi``.

    Levels are crossed downward exactly once (theta' = -1/p there), so each
    is bracketed by the first accepted step ending at or below it and then
    refined by bisection on the dense output. A terminal phase within
    ``terminal_tol`` above a level counts as a zero at ``b``.
    """
    zeros = ZeroList()
    if not path.complete or len(path.xs) < 2:
        return zeros
    span = path.xs[-1] - path.xs[0]
    xtol = xtol_rel * span
    k = 1
    level = path.theta0 - math.pi
    thetas = path.thetas
    for i in range(len(path.xs) - 1):
        while thetas[i + 1] <= level:
            lo, hi = float(path.xs[i]), float(path.xs[i + 1])
            if thetas[i + 1] == level:
                root = hi
            else:
                idx = np.array([i])
                while hi - lo > xtol:
                    mid = 0.5 * (lo + hi)
                    _, tm = path._interp(idx, np.array([mid]))
                    if tm[0] > level:
                        lo = mid
                    else:
                        hi = mid
                root = 0.5 * (lo + hi)
            zeros.xs.append(root)
            zeros.ks.append(k)
            k += 1
            level = path.theta0 - k * math.pi
    if thetas[-1] - level <= terminal_tol:
        zeros.xs.append(float(path.xs[-1]))
        zeros.ks.append(k)
    return zeros
