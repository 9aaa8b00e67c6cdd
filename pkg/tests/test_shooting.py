from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import NONLINEAR_GOLDENS

from quasiprufer.kernel import equation_residual
from quasiprufer.problem import Form, make_problem
from quasiprufer.selfadjoint import fd_oracle_eigenvalues
from quasiprufer.shooting import (
    BracketNotFound,
    EigenFailure,
    EigenResult,
    ScanSession,
    eigenvalues_up_to,
    find_eigenvalue,
    theta_at_b,
)


@pytest.mark.parametrize("lam, expected", [(1.0, -math.pi), (9.0, -3 * math.pi), (0.0, -math.atan(math.pi))])
def test_theta_at_b(baseline, lam, expected):
    assert theta_at_b(baseline, lam) == pytest.approx(expected, abs=1e-8)


def test_session_memoizes(baseline):
    session = ScanSession(baseline)
    theta_at_b(baseline, 2.0, session=session)
    path = session.paths[2.0]
    theta_at_b(baseline, 2.0, session=session)
    assert session.paths[2.0] is path


@pytest.mark.parametrize("n", [1, 3])
def test_find_baseline(baseline, n):
    res = find_eigenvalue(baseline, n)
    assert res.lam == pytest.approx(n * n, abs=1e-8)
    assert res.residual < 1e-9
    assert res.interior_zeros == n - 1
    assert res.ok
    lo, hi = res.bracket
    assert lo < res.lam < hi


def test_up_to_four(baseline):
    results = eigenvalues_up_to(baseline, 4)
    assert [r.n for r in results] == [1, 2, 3, 4]
    assert [r.lam for r in results] == pytest.approx([1, 4, 9, 16], abs=1e-8)


def test_linear_b_constant_s_shifts_spectrum():
    prob = make_problem(0.0, math.pi, s=1.0, form=Form.LINEAR_B)
    results = eigenvalues_up_to(prob, 2)
    assert [r.lam for r in results] == pytest.approx([2.0, 5.0], abs=1e-8)


def test_nonlinear_s_equals_x_goldens():
    prob = make_problem(0.0, math.pi, s="x")
    results = eigenvalues_up_to(prob, 3)
    for res, golden in zip(results, NONLINEAR_GOLDENS):
        assert isinstance(res, EigenResult)
        assert res.lam == pytest.approx(golden, abs=1e-7)
        assert res.residual < 1e-9
        assert res.interior_zeros == res.n - 1
        assert equation_residual(res.path, prob, res.lam).max_residual < 1e-6


@pytest.mark.parametrize("golden", NONLINEAR_GOLDENS)
def test_nonlinear_goldens_solve_the_original_equation(golden):
    # independent check in (y, p*u) coordinates: y' = u - s*y, (p*u)' = s*y*u + (q - lam)*y
    from scipy.integrate import solve_ivp

    def rhs(x, z):
        y, w = z
        return [w - x * y, x * y * w - golden * y]

    sol = solve_ivp(rhs, (0.0, math.pi), [0.0, -1.0], method="DOP853", rtol=1e-12, atol=1e-13)
    assert abs(sol.y[0, -1]) < 1e-7
    interior = np.sign(sol.y[0, 1:-1])
    assert np.count_nonzero(interior[1:] != interior[:-1]) == NONLINEAR_GOLDENS.index(golden)


def test_nonlinear_terminal_phase_is_not_monotone_far_left():
    # a finding, pinned: the coupled amplitude term lets theta(b; lam) turn
    # around for strongly negative lam, and the solver reports it
    prob = make_problem(0.0, math.pi, s="x")
    assert theta_at_b(prob, -40.0) < theta_at_b(prob, -10.0)
    res = find_eigenvalue(prob, 1, (-60.0, 10.0, 4.0))
    assert res.lam == pytest.approx(NONLINEAR_GOLDENS[0], abs=1e-7)
    assert any("not monotone" in d for d in res.diagnostics)


def test_against_oracle_for_linear_potential():
    prob = make_problem(0.0, 1.0, q="x", form=Form.LINEAR_B)
    oracle = fd_oracle_eigenvalues(prob, 1, 2000).extrapolated[0]
    assert find_eigenvalue(prob, 1).lam == pytest.approx(oracle, abs=1e-6)


def test_bracket_not_found_reports_ends(baseline):
    with pytest.raises(BracketNotFound) as info:
        find_eigenvalue(baseline, 2, (100.0, 101.0, 1.5), max_expansions=2)
    assert info.value.g_lo < 0 and info.value.g_hi < 0


def test_batch_keeps_going_after_failure():
    # theta(a) = pi with s = x blows up for strongly negative lam; a window
    # that must expand through that region fails without aborting the batch
    prob = make_problem(0.0, 5.0, s="x", theta0="pi")
    results = eigenvalues_up_to(prob, 2, search=(-400.0, -300.0, 4.0))
    assert all(isinstance(r, EigenFailure) for r in results)
    assert results[0].kind in ("BracketNotFound", "IntegrationFailure", "BlowUpInBracket")


def test_bad_index(baseline):
    with pytest.raises(ValueError):
        find_eigenvalue(baseline, 0)


def _random_s_zero(rng, form):
    return make_problem(
        0.0,
        1.0,
        p=f"{rng.uniform(0.6, 1.8)!r} + {rng.uniform(0, 0.4)!r}*sin({rng.uniform(1, 5)!r}*x)",
        q=f"{rng.uniform(-5, 5)!r}*x^2",
        omega=f"{rng.uniform(0.6, 1.8)!r} + {rng.uniform(0, 0.4)!r}*cos(x)",
        form=form,
    )


def test_terminal_phase_strictly_decreasing(baseline):
    rng = np.random.default_rng(3)
    problems = [baseline] + [_random_s_zero(rng, Form.NONLINEAR_A) for _ in range(4)]
    for prob in problems:
        for _ in range(10):
            l1, l2 = np.sort(rng.uniform(-20, 200, 2))
            assert theta_at_b(prob, l1) > theta_at_b(prob, l2)


def test_forms_agree_when_s_vanishes():
    rng = np.random.default_rng(11)
    for _ in range(4):
        a_prob = _random_s_zero(rng, Form.NONLINEAR_A)
        b_prob = a_prob.with_(form=Form.LINEAR_B)
        for ra, rb in zip(eigenvalues_up_to(a_prob, 3), eigenvalues_up_to(b_prob, 3)):
            assert ra.lam == pytest.approx(rb.lam, abs=1e-7)


def test_spectrum_independent_of_amplitude_when_s_vanishes():
    prob = _random_s_zero(np.random.default_rng(5), Form.NONLINEAR_A)
    big = prob.with_(r0=100.0)
    for r1, r100 in zip(eigenvalues_up_to(prob, 3), eigenvalues_up_to(big, 3)):
        assert r1.lam == pytest.approx(r100.lam, abs=1e-7)


def test_indices_increase_and_zero_counts_match():
    prob = make_problem(0.0, 2.0, p="1+x", s="0.5*x", q="cos(x)", form=Form.LINEAR_B)
    results = eigenvalues_up_to(prob, 5)
    lams = [r.lam for r in results]
    assert all(l1 < l2 for l1, l2 in zip(lams, lams[1:]))
    assert [r.interior_zeros for r in results] == [0, 1, 2, 3, 4]
