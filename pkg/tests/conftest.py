from __future__ import annotations

import math

import numpy as np
import pytest

from quasiprufer import Form, eigenvalues_up_to, fd_oracle_eigenvalues, make_problem

SUITE_SEED = 20240611
SUITE_SIZE = 20

# nonlinear-A, s = x on (0, pi), theta(a) = 0: no external truth exists, these
# are regression values certified by the phase criterion, the zero count and
# the equation residual
NONLINEAR_GOLDENS = [0.8363125261289216, 4.512758778887292, 9.318861373101207]

# one line per acceptance criterion, printed after the run
_ACCEPTANCE_LINES: dict[str, str] = {}


def record_acceptance(key: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE_LINES[key] = f"{key}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE_LINES, key=lambda k: int(k[2:].split(".")[0])):
        terminalreporter.write_line(_ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def baseline():
    return make_problem(0.0, math.pi)


def random_linear_b(rng: np.random.Generator, with_s: bool = True):
    """A smooth linear-B problem on (0, 1) with p, omega in [0.5, 2] and |q| <= 5."""
    p0 = rng.uniform(0.7, 1.5)
    pa, pk, pphi = rng.uniform(0.0, 0.25), rng.uniform(1.0, 6.0), rng.uniform(0, 2 * math.pi)
    w0 = rng.uniform(0.7, 1.5)
    wa, wk = rng.uniform(0.0, 0.25), rng.uniform(1.0, 6.0)
    qa, qb, qk = rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(1.0, 8.0)
    p = f"{p0!r}*(1 + {pa!r}*sin({pk!r}*x + {pphi!r}))"
    omega = f"{w0!r}*(1 + {wa!r}*cos({wk!r}*x))"
    q = f"{qa!r}*cos({qk!r}*x) + {qb!r}*x"
    s = f"{rng.uniform(-1, 1)!r} + {rng.uniform(-1, 1)!r}*x" if with_s else 0.0
    return make_problem(0.0, 1.0, p=p, s=s, q=q, omega=omega, form=Form.LINEAR_B)


@pytest.fixture(scope="session")
def linear_b_suite():
    rng = np.random.default_rng(SUITE_SEED)
    return [random_linear_b(rng) for _ in range(SUITE_SIZE)]


@pytest.fixture(scope="session")
def s_zero_suite():
    rng = np.random.default_rng(SUITE_SEED + 1)
    return [random_linear_b(rng, with_s=False) for _ in range(SUITE_SIZE)]


@pytest.fixture(scope="session")
def suite_results(linear_b_suite):
    """Shooting results and oracle values for n = 1..3 on each suite problem."""
    return [(eigenvalues_up_to(prob, 3), fd_oracle_eigenvalues(prob, 3)) for prob in linear_b_suite]


@pytest.fixture(scope="session")
def suite_spectra(suite_results):
    """(shooting, oracle) eigenvalue lists per suite problem."""
    return [
        ([getattr(r, "lam", math.nan) for r in shot], list(oracle.extrapolated))
        for shot, oracle in suite_results
    ]
