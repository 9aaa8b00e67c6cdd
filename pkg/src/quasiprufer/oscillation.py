"""Empirical checks of the comparison and zero-monotonicity statements.

Reports keep the full witness data so that a failed statement can be
inspected rather than just counted.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .integrate import DEFAULT_TOL, PathStatus, detect_pi_crossings, integrate_prufer
from .problem import Problem, ProblemError

__all__ = [
    "HypothesisViolation",
    "IntegrationError",
    "Witness",
    "InterlacingReport",
    "MonotonicityReport",
    "solution_zeros",
    "check_interlacing",
    "zero_monotonicity",
]


class HypothesisViolation(ProblemError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass
class Witness:
    left: float
    right: float
    zero: Optional[float]  # a zero of the other solution in (left, right), or None


@dataclass
class InterlacingReport:
    lam: float
    zeros_1: list[float]
    zeros_2: list[float]
    witnesses: list[Witness]
    verdict: bool
    # same check with the roles of the two solutions swapped
    reverse_witnesses: list[Witness] = field(default_factory=list)
    reverse_verdict: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[Witness]:
        return [w for w in self.witnesses if w.zero is None]


@dataclass
class MonotonicityReport:
    lambdas: list[float]
    table: list[list[Optional[float]]]  # table[i][k-1] = x_k(lambdas[i])
    verdict: bool
    violations: list[tuple[int, float, float]]
    failures: list[tuple[float, str]] = field(default_factory=list)

    def column(self, k: int) -> list[Optional[float]]:
        return [row[k - 1] if k <= len(row) else None for row in self.table]


def solution_zeros(problem: Problem, lam: float, tol=DEFAULT_TOL) -> list[float]:
    """Zeros of the solution in (a, b], from phase crossings."""
    path = integrate_prufer(problem, lam, tol=tol)
    if path.status is not PathStatus.COMPLETE:
        raise IntegrationError(
            f"integration at lam={lam!r} ended with {path.status.value} at x={path.failure_x!r}"
        )
    return list(detect_pi_crossings(path).xs)


def _same(f, g, xs) -> bool:
    return f is g or bool(np.array_equal(f.sample(xs), g.sample(xs)))


def _witnesses(zeros_1: list[float], zeros_2: list[float]) -> list[Witness]:
    out = []
    for left, right in zip(zeros_1, zeros_1[1:]):
        i = bisect.bisect_right(zeros_2, left)
        z = zeros_2[i] if i < len(zeros_2) and zeros_2[i] < right else None
        out.append(Witness(left, right, z))
    return out


def check_interlacing(
    problem1: Problem, problem2: Problem, lam: float, tol=DEFAULT_TOL
) -> InterlacingReport:
    """Does every open interval between consecutive zeros of y1 contain a zero of y2?

    ``problem1`` carries the smaller potential (``q1 <= q2`` on the grid).
    The shared zero at ``a`` takes part in the pairs when both solutions
    start from the same phase.
    """
    if (problem1.a, problem1.b) != (problem2.a, problem2.b):
        raise HypothesisViolation("problems must share the interval")
    if problem1.form is not problem2.form:
        raise HypothesisViolation("problems must share the equation form")
    xs = problem1.grid()
    for name in ("p", "s", "omega"):
        if not _same(getattr(problem1, name), getattr(problem2, name), xs):
            raise HypothesisViolation(f"problems must share {name}")
    q1, q2 = problem1.q.sample(xs), problem2.q.sample(xs)
    bad = np.nonzero(q1 > q2)[0]
    if bad.size:
        raise HypothesisViolation(f"need q1 <= q2; violated at x={float(xs[bad[0]])!r}")

    z1 = solution_zeros(problem1, lam, tol)
    z2 = solution_zeros(problem2, lam, tol)
    notes = []
    if problem1.theta0 == problem2.theta0:
        p1, p2 = [problem1.a] + z1, [problem2.a] + z2
    else:
        p1, p2 = z1, z2
        notes.append("initial phases differ; the zero at a is excluded from the pairs")
    if np.array_equal(q1, q2):
        notes.append("q1 == q2 on the grid: the comparison is vacuous")
        witnesses = [Witness(l, r, None) for l, r in zip(p1, p1[1:])]
        return InterlacingReport(lam, z1, z2, witnesses, True, [], True, notes)
    witnesses = _witnesses(p1, p2)
    reverse = _witnesses(p2, p1)
    if len(p1) < 2:
        notes.append("solution 1 has fewer than two zeros: no pairs to test")
    return InterlacingReport(
        lam=lam,
        zeros_1=z1,
        zeros_2=z2,
        witnesses=witnesses,
        verdict=all(w.zero is not None for w in witnesses),
        reverse_witnesses=reverse,
        reverse_verdict=all(w.zero is not None for w in reverse),
        notes=notes,
    )


def zero_monotonicity(problem: Problem, lambdas: Sequence[float], tol=DEFAULT_TOL) -> MonotonicityReport:
    """Tabulate ``x_k(lam)`` and flag any zero that fails to move left as lam grows.

    A zero present at ``lam_i`` that is missing or not strictly further left
    at a larger ``lam_j`` is a violation ``(k, lam_i, lam_j)``.
    """
    lambdas = [float(v) for v in lambdas]
    if len(lambdas) < 2:
        raise ValueError("need at least two lambdas")
    if any(l2 <= l1 for l1, l2 in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be strictly increasing")
    rows: list[Optional[list[float]]] = []
    failures = []
    for lam in lambdas:
        try:
            rows.append(solution_zeros(problem, lam, tol))
        except IntegrationError as exc:
            rows.append(None)
            failures.append((lam, str(exc)))
    violations = []
    good = [(lam, row) for lam, row in zip(lambdas, rows) if row is not None]
    for i, (li, ri) in enumerate(good):
        for lj, rj in good[i + 1:]:
            for k, xk in enumerate(ri, start=1):
                if k > len(rj) or not rj[k - 1] < xk:
                    violations.append((k, li, lj))
    table = [list(r) if r is not None else [] for r in rows]
    return MonotonicityReport(
        lambdas=lambdas,
        table=table,
        verdict=not violations,
        violations=violations,
        failures=failures,
    )
