"""Command-line front end.

    quasiprufer <command> --config run.json [--out PATH] [--format table|csv|json]
                [--n N] [--lambda v[,v...]] [--mesh M] [--tol-abs A --tol-rel R]

Errors go to stderr as one line ``E_CONFIG: ...`` (exit 2) or
``E_NUMERIC: ...`` (exit 3).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .bounds import eigen_bounds
from .coeffexpr import ExprDomainError, ExprSyntaxError
from .integrate import DEFAULT_TOL, PathStatus, integrate_prufer
from .kernel import equation_residual
from .oscillation import IntegrationError, check_interlacing, solution_zeros
from .problem import Form, Problem, ProblemError, build_problem
from .selfadjoint import OracleError, fd_oracle_eigenvalues
from .shooting import EigenFailure, ShootingError, eigenvalues_up_to

COMMANDS = ("solve", "phase", "zeros", "bounds", "oracle", "compare", "residual")
DEFAULT_FORMAT = {
    "solve": "table",
    "phase": "csv",
    "zeros": "csv",
    "bounds": "table",
    "oracle": "json",
    "compare": "json",
    "residual": "json",
}
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


@dataclass
class RunConfig:
    problem: Problem
    raw: dict
    tol: tuple[float, float] = DEFAULT_TOL
    n: Optional[int] = None
    lambdas: list[float] = field(default_factory=list)
    mesh: int = 2000
    points: int = 1000
    fmt: str = "table"
    out: Optional[Path] = None
    base_dir: Optional[Path] = None


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _parse_lambdas(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--lambda expects comma-separated numbers, got {text!r}") from None


def load_config(args: argparse.Namespace) -> RunConfig:
    try:
        return _load_config(args)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (ConfigError, ProblemError, ExprSyntaxError)):
            raise
        raise ConfigError(f"bad config value: {exc}") from None


def _load_config(args: argparse.Namespace) -> RunConfig:
    path = Path(args.config)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    problem = build_problem(raw, base_dir=path.parent)

    tol_cfg = raw.get("tol", {})
    tol = (
        float(args.tol_abs if args.tol_abs is not None else tol_cfg.get("abs", DEFAULT_TOL[0])),
        float(args.tol_rel if args.tol_rel is not None else tol_cfg.get("rel", DEFAULT_TOL[1])),
    )
    for v in tol:
        if not 1e-13 <= v <= 1e-2:
            raise ConfigError(f"tolerances must lie in [1e-13, 1e-2], got {tol!r}")

    n = args.n if args.n is not None else raw.get("n", raw.get("N"))
    if n is not None and (int(n) != n or n < 1):
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    if args.lambdas is not None:
        lambdas = _parse_lambdas(args.lambdas)
    else:
        lam_cfg = raw.get("lambda", [])
        lambdas = [float(v) for v in (lam_cfg if isinstance(lam_cfg, list) else [lam_cfg])]
    fmt = args.format or raw.get("format") or DEFAULT_FORMAT[args.command]
    if fmt not in ("table", "csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    out = args.out or raw.get("out")
    return RunConfig(
        problem=problem,
        raw=raw,
        tol=tol,
        n=None if n is None else int(n),
        lambdas=lambdas,
        mesh=int(args.mesh if args.mesh is not None else raw.get("mesh", 2000)),
        points=int(raw.get("points", 1000)),
        fmt=fmt,
        out=Path(out) if out else None,
        base_dir=path.parent,
    )


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows) for tabular output or a dict for JSON


def _need_lambdas(cfg: RunConfig, count: Optional[int] = None) -> list[float]:
    if not cfg.lambdas:
        raise ConfigError("this command needs --lambda (or 'lambda' in the config)")
    if count is not None and len(cfg.lambdas) != count:
        raise ConfigError(f"this command takes exactly {count} lambda value(s)")
    return cfg.lambdas


def cmd_solve(cfg: RunConfig):
    N = cfg.n or 1
    results = eigenvalues_up_to(cfg.problem, N, tol=cfg.tol)
    columns = ["n", "lambda", "theta_b", "phase_residual", "equation_residual",
               "interior_zeros", "iterations", "zeros", "diagnostics", "error"]
    rows = []
    for res in results:
        if isinstance(res, EigenFailure):
            rows.append({"n": res.n, "error": f"{res.kind}: {res.error}"})
            continue
        eq = equation_residual(res.path, cfg.problem, res.lam)
        rows.append({
            "n": res.n,
            "lambda": res.lam,
            "theta_b": res.theta_b,
            "phase_residual": res.residual,
            "equation_residual": eq.max_residual,
            "interior_zeros": res.interior_zeros,
            "iterations": res.iterations,
            "zeros": list(res.zeros.xs),
            "diagnostics": "; ".join(res.diagnostics),
            "error": "",
        })
    return columns, rows


def _phase_rows(problem: Problem, path, points: int):
    xs = np.linspace(problem.a, problem.b, points)
    r, th = path.evaluate(xs)
    pv = problem.p.sample(xs)
    y = r * np.sin(th)
    if problem.form is Form.NONLINEAR_A:
        u = -r * np.cos(th) / pv
    else:
        u = -r * np.cos(th) / pv + problem.s.sample(xs) * y
    return [
        {"x": xs[i], "theta": th[i], "r": r[i], "y": y[i], "u": u[i]} for i in range(points)
    ]


def cmd_phase(cfg: RunConfig):
    (lam,) = _need_lambdas(cfg, 1)
    path = integrate_prufer(cfg.problem, lam, tol=cfg.tol)
    if path.status is not PathStatus.COMPLETE:
        raise NumericalError(f"integration ended with {path.status.value} at x={path.failure_x!r}")
    return ["x", "theta", "r", "y", "u"], _phase_rows(cfg.problem, path, cfg.points)


def cmd_zeros(cfg: RunConfig):
    rows = []
    for lam in _need_lambdas(cfg):
        try:
            zeros = solution_zeros(cfg.problem, lam, tol=cfg.tol)
        except IntegrationError as exc:
            rows.append({"lambda": lam, "error": str(exc)})
            continue
        rows += [{"lambda": lam, "k": k, "x": x, "error": ""} for k, x in enumerate(zeros, start=1)]
    return ["lambda", "k", "x", "error"], rows


def cmd_bounds(cfg: RunConfig):
    nmax = cfg.n or 1
    rows = []
    for n in range(1, nmax + 1):
        res = eigen_bounds(cfg.problem, n, f=cfg.raw.get("f"), h=cfg.raw.get("h"), c=cfg.raw.get("c"))
        row = asdict(res)
        row["caveats"] = "; ".join(res.caveats)
        rows.append(row)
    columns = ["n", "lower", "upper", "m", "M", "c", "D", "int_inv_f", "int_inv_h", "caveats"]
    return columns, rows


def cmd_oracle(cfg: RunConfig):
    res = fd_oracle_eigenvalues(cfg.problem, cfg.n or 1, cfg.mesh)
    return {
        "meshes": list(res.meshes),
        "raw": [list(v) for v in res.raw],
        "extrapolated": res.extrapolated,
        "order_mesh": res.order_mesh,
        "raw_order_mesh": res.raw_order_mesh,
        "order": res.order,
        "orders": res.orders,
    }


def cmd_compare(cfg: RunConfig):
    (lam,) = _need_lambdas(cfg, 1)
    if "q2" not in cfg.raw:
        raise ConfigError("compare needs 'q2' (the larger potential) in the config")
    other = dict(cfg.raw)
    other["q"] = cfg.raw["q2"]
    problem2 = build_problem(other, base_dir=cfg.base_dir)
    rep = check_interlacing(cfg.problem, problem2, lam, tol=cfg.tol)
    data = asdict(rep)
    data["count_zeros_1"] = len(rep.zeros_1)
    data["count_zeros_2"] = len(rep.zeros_2)
    return data


def cmd_residual(cfg: RunConfig):
    reports = []
    for lam in _need_lambdas(cfg):
        path = integrate_prufer(cfg.problem, lam, tol=cfg.tol)
        if path.status is not PathStatus.COMPLETE:
            raise NumericalError(
                f"integration at lam={lam!r} ended with {path.status.value} at x={path.failure_x!r}"
            )
        reports.append(asdict(equation_residual(path, cfg.problem, lam)))
    return {"residuals": reports}


HANDLERS = {
    "solve": cmd_solve,
    "phase": cmd_phase,
    "zeros": cmd_zeros,
    "bounds": cmd_bounds,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "residual": cmd_residual,
}


# ---------------------------------------------------------------------------
# rendering


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return "" if v is None else str(v)


def render(result, fmt: str) -> str:
    if isinstance(result, dict):
        if fmt == "json":
            return json.dumps(result, indent=2) + "\n"
        return "\n".join(f"{k}: {_cell(v) if not isinstance(v, dict) else json.dumps(v)}"
                         for k, v in result.items()) + "\n"
    columns, rows = result
    if fmt == "json":
        return json.dumps([{c: row.get(c) for c in columns if c in row} for row in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c)) for c in columns])
        return buf.getvalue()
    shown = [c for c in columns if any(row.get(c) not in (None, "", []) for row in rows)]
    cells = [[format(row[c], ".12g") if isinstance(row.get(c), float) else _cell(row.get(c))
              for c in shown] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(shown)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(shown, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiprufer",
        description="Prufer-phase eigenvalue analysis for quasi-derivative Sturm-Liouville problems.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("table", "csv", "json"))
    parser.add_argument("--n", type=int, help="eigenvalue count / index")
    parser.add_argument("--lambda", dest="lambdas", help="comma-separated spectral parameter values")
    parser.add_argument("--mesh", type=int, help="finite-difference mesh intervals (oracle)")
    parser.add_argument("--tol-abs", type=float, dest="tol_abs")
    parser.add_argument("--tol-rel", type=float, dest="tol_rel")
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        result = HANDLERS[args.command](cfg)
    except (ConfigError, ProblemError, ExprSyntaxError, ExprDomainError) as exc:
        print(f"E_CONFIG: {_one_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ShootingError, IntegrationError, OracleError, ArithmeticError, ValueError) as exc:
        print(f"E_NUMERIC: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(result, cfg.fmt)
    if cfg.out is not None:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
