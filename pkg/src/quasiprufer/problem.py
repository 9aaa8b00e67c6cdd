"""Boundary value problem definition: interval, coefficients, equation form."""

from __future__ import annotations

import bisect
import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .coeffexpr import ExprAST, compile_expr, eval_expr, parse_expr, to_source

__all__ = [
    "Form",
    "CoefficientFn",
    "Problem",
    "ProblemError",
    "build_problem",
    "eval_coefficients",
    "VALIDATION_POINTS",
]

VALIDATION_POINTS = 2001


class ProblemError(ValueError):
    """Invalid problem definition (interval, positivity, table data)."""


class Form(str, enum.Enum):
    # s*y*(y'+sy): the equation the Prufer system (r, theta) is derived from
    NONLINEAR_A = "nonlinear-A"
    # s*p*(y'+sy): expands to -(p y')' + Q y, linear and self-adjoint
    LINEAR_B = "linear-B"


class CoefficientFn:
    """A real function of x given by an expression or a sampled table.

    Tables are interpolated with a monotone (PCHIP) cubic so the interpolant
    never overshoots neighbouring samples.
    """

    def __init__(
        self,
        func: Callable[[float], float],
        *,
        label: str,
        derivative: Optional["CoefficientFn"] = None,
        ast: Optional[ExprAST] = None,
        table: Optional[tuple[np.ndarray, np.ndarray]] = None,
    ):
        self._func = func
        self.label = label
        self.derivative = derivative
        self.ast = ast
        self.table = table

    def __call__(self, x: float) -> float:
        return self._func(x)

    def __repr__(self) -> str:
        return f"CoefficientFn({self.label!r})"

    @classmethod
    def from_expr(cls, source: str | ExprAST, derivative: str | ExprAST | None = None) -> "CoefficientFn":
        ast = parse_expr(source) if isinstance(source, str) else source
        deriv = None
        if derivative is not None:
            deriv = cls.from_expr(derivative)
        label = source if isinstance(source, str) else to_source(ast)
        return cls(compile_expr(ast), label=label, derivative=deriv, ast=ast)

    @classmethod
    def constant(cls, value: float) -> "CoefficientFn":
        value = float(value)
        return cls(lambda x: value, label=repr(value), derivative=cls._zero(), ast=None)

    @classmethod
    def _zero(cls) -> "CoefficientFn":
        return cls(lambda x: 0.0, label="0.0")

    @classmethod
    def from_table(cls, xs: Sequence[float], values: Sequence[float], label: str = "table") -> "CoefficientFn":
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=float)
        if xs.ndim != 1 or xs.shape != values.shape or xs.size < 2:
            raise ProblemError(f"{label}: table needs at least two (x, value) pairs")
        if not np.all(np.diff(xs) > 0):
            raise ProblemError(f"{label}: table abscissae must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(values))):
            raise ProblemError(f"{label}: table contains non-finite entries")
        pchip = PchipInterpolator(xs, values)
        func = _PiecewiseCubic(pchip.x, pchip.c)
        dpchip = pchip.derivative()
        deriv = cls(_PiecewiseCubic(dpchip.x, dpchip.c), label=f"d/dx {label}")
        return cls(func, label=label, derivative=deriv, table=(xs, values))

    @classmethod
    def from_csv(cls, path: str | Path) -> "CoefficientFn":
        """Two-column ``x,value`` file; a non-numeric first row is a header."""
        xs, vals = [], []
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or not "".join(row).strip():
                    continue
                try:
                    x, v = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if i == 0:
                        continue
                    raise ProblemError(f"{path}: malformed row {i + 1}: {row!r}") from None
                xs.append(x)
                vals.append(v)
        return cls.from_table(xs, vals, label=str(path))

    @property
    def is_table(self) -> bool:
        return self.table is not None

    def sample(self, xs: np.ndarray) -> np.ndarray:
        f = self._func
        return np.fromiter((f(float(x)) for x in xs), dtype=float, count=len(xs))


class _PiecewiseCubic:
    """Scalar evaluator for scipy PPoly coefficients (cheap per-point calls)."""

    def __init__(self, breaks: np.ndarray, coefs: np.ndarray):
        self.breaks = [float(v) for v in breaks]
        k = coefs.shape[0]
        self.coefs = [[float(coefs[j, i]) for j in range(k)] for i in range(coefs.shape[1])]
        self.last = len(self.coefs) - 1

    def __call__(self, x: float) -> float:
        i = bisect.bisect_right(self.breaks, x) - 1
        if i < 0:
            i = 0
        elif i > self.last:
            i = self.last
        t = x - self.breaks[i]
        acc = 0.0
        for c in self.coefs[i]:
            acc = acc * t + c
        return acc


def _as_coefficient(value: Any, name: str, base_dir: Path | None) -> CoefficientFn:
    if isinstance(value, CoefficientFn):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return CoefficientFn.constant(value)
    if isinstance(value, str):
        return CoefficientFn.from_expr(value)
    if isinstance(value, Mapping):
        if "table" in value:
            table = value["table"]
            if isinstance(table, str):
                path = Path(table)
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                fn = CoefficientFn.from_csv(path)
            else:
                pairs = np.asarray(table, dtype=float)
                fn = CoefficientFn.from_table(pairs[:, 0], pairs[:, 1], label=f"{name} table")
            if "derivative" in value:
                fn.derivative = _as_coefficient(value["derivative"], f"{name}'", base_dir)
            return fn
        if "expr" in value:
            return CoefficientFn.from_expr(str(value["expr"]), value.get("derivative"))
    raise ProblemError(f"coefficient {name!r}: cannot interpret {value!r}")


def _as_real(value: Any, name: str) -> float:
    if isinstance(value, bool):
        raise ProblemError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return eval_expr(parse_expr(value), 0.0)
    raise ProblemError(f"{name}: expected a number, got {value!r}")


@dataclass(frozen=True, eq=False)
class Problem:
    """Validated Dirichlet problem on [a, b].

    ``form`` selects the middle term of the operator (see :class:`Form`).
    ``theta0`` is the initial phase; 0 gives ``y'(a) < 0`` and pi gives
    ``y'(a) > 0`` under the orientation ``p(y' + s y) = -r cos(theta)``.
    """

    a: float
    b: float
    p: CoefficientFn
    s: CoefficientFn
    q: CoefficientFn
    omega: CoefficientFn
    form: Form = Form.NONLINEAR_A
    r0: float = 1.0
    theta0: float = 0.0
    p_positive: bool = field(default=False, compare=False)
    weight_positive: bool = field(default=False, compare=False)
    s_identically_zero: bool = field(default=False, compare=False)

    @cached_property
    def associated_q(self):
        from .selfadjoint import associated_Q

        return associated_Q(self)

    def grid(self, points: int = VALIDATION_POINTS) -> np.ndarray:
        return np.linspace(self.a, self.b, points)

    def with_(self, **changes) -> "Problem":
        """Copy with some fields replaced, re-validated."""
        fields = dict(
            a=self.a, b=self.b, p=self.p, s=self.s, q=self.q, omega=self.omega,
            form=self.form, r0=self.r0, theta0=self.theta0,
        )
        fields.update(changes)
        return make_problem(**fields)


def make_problem(
    a: float,
    b: float,
    p: Any = 1.0,
    s: Any = 0.0,
    q: Any = 0.0,
    omega: Any = 1.0,
    form: Form | str = Form.NONLINEAR_A,
    r0: float = 1.0,
    theta0: float = 0.0,
    *,
    base_dir: Path | None = None,
) -> Problem:
    """Build and validate a :class:`Problem` from loosely typed pieces."""
    a = _as_real(a, "a")
    b = _as_real(b, "b")
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ProblemError(f"interval error: need finite a < b, got a={a!r}, b={b!r}")
    try:
        form = Form(form)
    except ValueError:
        raise ProblemError(f"unknown form {form!r}; expected 'nonlinear-A' or 'linear-B'") from None
    r0 = _as_real(r0, "r0")
    if not r0 > 0:
        raise ProblemError(f"r0 must be positive, got {r0!r}")
    theta0 = _as_real(theta0, "theta0")
    if not (theta0 == 0.0 or abs(theta0 - math.pi) < 1e-12):
        raise ProblemError(f"theta0 must be 0 or pi, got {theta0!r}")
    theta0 = 0.0 if theta0 == 0.0 else math.pi

    coeffs = {
        name: _as_coefficient(val, name, base_dir)
        for name, val in (("p", p), ("s", s), ("q", q), ("omega", omega))
    }
    xs = np.linspace(a, b, VALIDATION_POINTS)
    for name, fn in coeffs.items():
        if fn.is_table:
            tx = fn.table[0]
            if tx[0] > a or tx[-1] < b:
                raise ProblemError(
                    f"coefficient {name!r}: table spans [{tx[0]}, {tx[-1]}], must cover [{a}, {b}]"
                )
    samples = {name: fn.sample(xs) for name, fn in coeffs.items()}
    for name in ("p", "omega"):
        bad = np.nonzero(~(samples[name] > 0))[0]
        if bad.size:
            x_bad = float(xs[bad[0]])
            raise ProblemError(
                f"validation error: {name} must be positive, {name}({x_bad!r}) = {float(samples[name][bad[0]])!r}"
            )
    for name in ("s", "q"):
        if not np.all(np.isfinite(samples[name])):
            raise ProblemError(f"validation error: {name} is not finite on [a, b]")
    return Problem(
        a=a, b=b, form=form, r0=r0, theta0=theta0,
        p_positive=True, weight_positive=True,
        s_identically_zero=bool(np.all(samples["s"] == 0.0)),
        **coeffs,
    )


def build_problem(spec: Mapping[str, Any], base_dir: Path | None = None) -> Problem:
    """Build a Problem from a parsed config mapping.

    Required keys: ``a``, ``b``, ``p``, ``s``, ``q``. Optional: ``omega``
    (default 1), ``form`` (default nonlinear-A), ``r0`` (default 1),
    ``theta0`` (0 or pi, default 0).
    """
    missing = [k for k in ("a", "b", "p", "s", "q") if k not in spec]
    if missing:
        raise ProblemError(f"config is missing required key(s): {', '.join(missing)}")
    return make_problem(
        spec["a"], spec["b"], spec["p"], spec["s"], spec["q"],
        spec.get("omega", 1.0),
        form=spec.get("form", Form.NONLINEAR_A),
        r0=spec.get("r0", 1.0),
        theta0=spec.get("theta0", 0.0),
        base_dir=base_dir,
    )


def eval_coefficients(problem: Problem, x: float) -> tuple[float, float, float, float]:
    """Return ``(p, s, q, omega)`` at ``x``."""
    if not (problem.a <= x <= problem.b):
        raise ProblemError(f"x={x!r} outside [{problem.a}, {problem.b}]")
    return problem.p(x), problem.s(x), problem.q(x), problem.omega(x)
