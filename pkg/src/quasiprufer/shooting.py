"""Eigenvalues from the phase criterion ``theta(b; lam) = theta0 - n*pi``.

With the spectral parameter entering as ``q - lam*omega`` the terminal phase
decreases in lam, so ``g(lam) = theta(b; lam) - theta0 + n*pi`` is positive
below the n-th eigenvalue and negative above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .integrate import (
    DEFAULT_TOL,
    PathStatus,
    PruferPath,
    ZeroList,
    detect_pi_crossings,
    integrate_prufer,
)
from .problem import Form, Problem

__all__ = [
    "EigenResult",
    "EigenFailure",
    "ShootingError",
    "IntegrationFailure",
    "BracketNotFound",
    "BlowUpInBracket",
    "ScanSession",
    "theta_at_b",
    "find_eigenvalue",
    "eigenvalues_up_to",
    "PHASE_TOL",
]

PHASE_TOL = 1e-9
EXPANSION_FACTOR = 4.0
MAX_EXPANSIONS = 40
MAX_ITERATIONS = 200
# g values closer than this are treated as equal by the monotonicity check
_MONOTONE_SLACK = 1e-8


class ShootingError(RuntimeError):
    pass


class IntegrationFailure(ShootingError):
    def __init__(self, lam: float, path: PruferPath):
        super().__init__(f"integration at lam={lam!r} ended with {path.status.value} at x={path.failure_x!r}")
        self.lam = lam
        self.path = path


class BracketNotFound(ShootingError):
    def __init__(self, n: int, lo: float, g_lo: float, hi: float, g_hi: float):
        super().__init__(
            f"no bracket for n={n}: g({lo!r})={g_lo!r}, g({hi!r})={g_hi!r}"
        )
        self.lo, self.g_lo, self.hi, self.g_hi = lo, g_lo, hi, g_hi


class BlowUpInBracket(ShootingError):
    def __init__(self, n: int, lo: float, hi: float, lam: float):
        super().__init__(f"n={n}: integration failed at lam={lam!r} inside bracket [{lo!r}, {hi!r}]")
        self.lo, self.hi, self.lam = lo, hi, lam


@dataclass
class EigenResult:
    n: int
    lam: float
    theta_b: float
    zeros: ZeroList
    interior_zeros: int
    iterations: int
    residual: float
    bracket: tuple[float, float]
    diagnostics: list[str] = field(default_factory=list)
    path: Optional[PruferPath] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


@dataclass
class EigenFailure:
    n: int
    error: str
    kind: str


class ScanSession:
    """Memo of terminal phases for one problem and tolerance pair."""

    def __init__(self, problem: Problem, tol: tuple[float, float] = DEFAULT_TOL):
        self.problem = problem
        self.tol = (float(tol[0]), float(tol[1]))
        self.theta_b: dict[float, float] = {}
        self.paths: dict[float, PruferPath] = {}
        self.failures: dict[float, PruferPath] = {}

    def path(self, lam: float) -> PruferPath:
        lam = float(lam)
        if lam in self.paths:
            return self.paths[lam]
        if lam in self.failures:
            raise IntegrationFailure(lam, self.failures[lam])
        path = integrate_prufer(self.problem, lam, tol=self.tol)
        if path.status is not PathStatus.COMPLETE:
            self.failures[lam] = path
            raise IntegrationFailure(lam, path)
        self.paths[lam] = path
        self.theta_b[lam] = path.theta_end
        return path

    def theta(self, lam: float) -> float:
        lam = float(lam)
        if lam not in self.theta_b:
            self.path(lam)
        return self.theta_b[lam]


def _session_for(problem: Problem, tol, session: Optional[ScanSession]) -> ScanSession:
    if session is None:
        return ScanSession(problem, tol)
    if session.problem is not problem:
        raise ValueError("session belongs to a different problem")
    return session


def theta_at_b(
    problem: Problem,
    lam: float,
    tol: tuple[float, float] = DEFAULT_TOL,
    session: Optional[ScanSession] = None,
) -> float:
    """Terminal continuous phase; raises :class:`IntegrationFailure` on blow-up."""
    return _session_for(problem, tol, session).theta(lam)


def default_window(problem: Problem, n: int) -> tuple[float, float]:
    """Initial search window for the n-th eigenvalue.

    Uses the floor ``min Q/omega`` when the problem is linear (linear-B, or
    s identically zero), otherwise ``(-10, 10)``.
    """
    if problem.form is Form.LINEAR_B or problem.s_identically_zero:
        xs = problem.grid()
        m_est = float(np.min(problem.associated_q.sample(xs) / problem.omega.sample(xs)))
        span = problem.b - problem.a
        return m_est - 1.0, m_est + 10.0 * n * n * math.pi**2 / span**2
    return -10.0, 10.0


def monotonicity_violations(samples: dict[float, float]) -> list[tuple[float, float]]:
    """Adjacent sampled lam pairs where g fails to decrease."""
    lams = sorted(samples)
    return [
        (l1, l2)
        for l1, l2 in zip(lams, lams[1:])
        if samples[l2] > samples[l1] + _MONOTONE_SLACK
    ]


def _bracket(session: ScanSession, g, n: int, lo: float, hi: float, factor: float, max_expansions: int):
    """Expand ``[lo, hi]`` until ``g(lo) > 0 > g(hi)``; reuses memoized phases."""
    target = session.problem.theta0 - n * math.pi

    # tighten with anything already known from earlier indices
    known = sorted(session.theta_b.items())
    above = [l for l, t in known if t - target > 0]
    below = [l for l, t in known if t - target < 0]
    if above and below and max(above) < min(below):
        lo, hi = max(above), min(below)
        return lo, g(lo), hi, g(hi)
    if above and max(above) > lo:
        lo = max(above)
        hi = max(hi, lo + 1.0)
    if below and min(below) < hi:
        hi = min(below)
        lo = min(lo, hi - 1.0)

    g_lo, g_hi = g(lo), g(hi)
    width = hi - lo
    for _ in range(max_expansions):
        if g_lo > 0 and g_hi < 0:
            return lo, g_lo, hi, g_hi
        width *= factor
        if g_hi >= 0:
            if g_hi > 0:
                lo, g_lo = hi, g_hi
            hi = lo + width
            g_hi = g(hi)
        else:
            if g_lo < 0:
                hi, g_hi = lo, g_lo
            lo = hi - width
            g_lo = g(lo)
    if g_lo > 0 and g_hi < 0:
        return lo, g_lo, hi, g_hi
    raise BracketNotFound(n, lo, g_lo, hi, g_hi)


def find_eigenvalue(
    problem: Problem,
    n: int,
    search: Optional[tuple[float, float, float]] = None,
    *,
    tol: tuple[float, float] = DEFAULT_TOL,
    phase_tol: float = PHASE_TOL,
    session: Optional[ScanSession] = None,
    max_expansions: int = MAX_EXPANSIONS,
    max_iterations: int = MAX_ITERATIONS,
) -> EigenResult:
    """n-th Dirichlet eigenvalue by bracketing plus a secant/bisection hybrid.

    ``search`` is ``(lam_min, lam_max, expansion_factor)``; by default the
    window comes from :func:`default_window` and expands by a factor of 4.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    session = _session_for(problem, tol, session)
    if search is None:
        lo, hi = default_window(problem, n)
        factor = EXPANSION_FACTOR
    else:
        lo, hi, factor = (float(v) for v in search)
        if not lo < hi or factor <= 1:
            raise ValueError(f"bad search window {search!r}")

    target = problem.theta0 - n * math.pi
    samples: dict[float, float] = {}

    def g(lam):
        val = session.theta(lam) - target
        samples[float(lam)] = val
        return val

    lo, g_lo, hi, g_hi = _bracket(session, g, n, lo, hi, factor, max_expansions)
    bracket = (lo, hi)

    best_lam, best_g = (lo, g_lo) if abs(g_lo) < abs(g_hi) else (hi, g_hi)
    x1, g1, x2, g2 = lo, g_lo, hi, g_hi
    iterations = 0
    width_history = [hi - lo]
    force_bisect = False
    while abs(best_g) >= phase_tol and iterations < max_iterations:
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
            break
        cand = None
        if not force_bisect and g1 != g2:
            cand = x2 - g2 * (x2 - x1) / (g2 - g1)
            if not (lo < cand < hi):
                cand = None
        if cand is None:
            cand = 0.5 * (lo + hi)
        try:
            gc = g(cand)
        except IntegrationFailure:
            raise BlowUpInBracket(n, lo, hi, cand) from None
        iterations += 1
        if gc > 0:
            lo, g_lo = cand, gc
        else:
            hi, g_hi = cand, gc
        x1, g1, x2, g2 = x2, g2, cand, gc
        if abs(gc) < abs(best_g):
            best_lam, best_g = cand, gc
        width_history.append(hi - lo)
        # secant steps must at least halve the bracket every two iterations
        force_bisect = len(width_history) >= 3 and width_history[-1] > 0.5 * width_history[-3]

    diagnostics = []
    if abs(best_g) >= phase_tol:
        diagnostics.append(f"phase residual {abs(best_g):.3e} above tolerance {phase_tol:.1e}")
    violations = monotonicity_violations(samples)
    if violations:
        diagnostics.append(
            "terminal phase not monotone in lam between "
            + ", ".join(f"({l1:.10g}, {l2:.10g})" for l1, l2 in violations[:5])
        )
    path = session.path(best_lam)
    zeros = detect_pi_crossings(path)
    interior = len(zeros.interior(problem.b, span=problem.b - problem.a))
    if interior != n - 1:
        diagnostics.append(
            f"zero-count mismatch: expected {n - 1} interior zeros, found {interior} "
            "(possible missed eigenvalue)"
        )
    return EigenResult(
        n=n,
        lam=best_lam,
        theta_b=path.theta_end,
        zeros=zeros,
        interior_zeros=interior,
        iterations=iterations,
        residual=abs(best_g),
        bracket=bracket,
        diagnostics=diagnostics,
        path=path,
    )


def eigenvalues_up_to(
    problem: Problem,
    N: int,
    *,
    tol: tuple[float, float] = DEFAULT_TOL,
    phase_tol: float = PHASE_TOL,
    search: Optional[tuple[float, float, float]] = None,
    indices: Optional[Sequence[int]] = None,
) -> list[EigenResult | EigenFailure]:
    """Eigenvalues 1..N sharing one memo; failures are recorded per index."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    session = ScanSession(problem, tol)
    out: list[EigenResult | EigenFailure] = []
    for n in indices or range(1, int(N) + 1):
        try:
            out.append(
                find_eigenvalue(problem, n, search, tol=tol, phase_tol=phase_tol, session=session)
            )
        except ShootingError as exc:
            out.append(EigenFailure(n=n, error=str(exc), kind=type(exc).__name__))
    return out
