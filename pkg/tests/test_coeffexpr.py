from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiprufer.coeffexpr import (
    Binary,
    Const,
    ExprDomainError,
    ExprSyntaxError,
    Unary,
    Var,
    compile_expr,
    eval_expr,
    parse_expr,
    to_source,
)


def ev(src, x=0.0):
    return eval_expr(parse_expr(src), x)


@pytest.mark.parametrize(
    "src, x, expected",
    [
        ("x", 3.0, 3.0),
        ("sin(x)+1", 0.0, 1.0),
        ("2^3^2", 0.0, 512.0),
        ("x^2 - 1", 2.0, 3.0),
        ("exp(0)*cos(0)", 7.5, 1.0),
        ("1+2*3", 0.0, 7.0),
        ("(1+2)*3", 0.0, 9.0),
        ("-x^2", 2.0, -4.0),
        ("2*-x", 3.0, -6.0),
        ("8/4/2", 0.0, 1.0),
        ("pi", 0.0, math.pi),
        ("ln(e)", 0.0, 1.0),
        ("  sqrt( 16 ) ", 0.0, 4.0),
        ("abs(-2.5e-1)", 0.0, 0.25),
    ],
)
def test_evaluation_vectors(src, x, expected):
    assert ev(src, x) == pytest.approx(expected, rel=1e-15, abs=1e-15)


@pytest.mark.parametrize(
    "src, pos",
    [("(1+2", 4), ("foo(x)", 0), ("1 2", 2), ("2x", 1), ("sin x", 4), ("1+", 2), ("3 $ 4", 2)],
)
def test_syntax_errors_carry_position(src, pos):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(src)
    assert info.value.position == pos


def test_empty_source_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expr("   ")


@pytest.mark.parametrize("src, x", [("1/x", 0.0), ("ln(x)", 0.0), ("ln(x)", -1.0), ("sqrt(x)", -4.0)])
def test_domain_errors(src, x):
    with pytest.raises(ExprDomainError) as info:
        ev(src, x)
    assert info.value.x == x


def test_domain_error_names_subexpression():
    with pytest.raises(ExprDomainError) as info:
        ev("1 + 2/(x-1)", 1.0)
    assert "x" in str(info.value.subexpr)


def test_overflow_is_an_error_not_inf():
    with pytest.raises(ExprDomainError):
        ev("exp(x)", 1000.0)


def test_compiled_matches_interpreter_and_raises_the_same():
    ast = parse_expr("sin(x)^2 + ln(1+x^2)/sqrt(2+x)")
    f = compile_expr(ast)
    for x in (-1.5, 0.0, 0.3, 4.0):
        assert f(x) == eval_expr(ast, x)
    g = compile_expr(parse_expr("1/x"))
    with pytest.raises(ExprDomainError):
        g(0.0)


# ---------------------------------------------------------------------------
# round trip on random trees

_funcs = ("neg", "sin", "cos", "tan", "exp", "ln", "sqrt", "abs")

leaves = st.one_of(
    st.just(Var()),
    st.floats(-50, 50, allow_nan=False, allow_infinity=False).map(Const),
)


def _extend(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(_funcs), children),
        st.builds(Binary, st.sampled_from(("+", "-", "*", "/", "^")), children, children),
    )


def _depth(t):
    if isinstance(t, (Const, Var)):
        return 0
    if isinstance(t, Unary):
        return 1 + _depth(t.child)
    return 1 + max(_depth(t.left), _depth(t.right))


trees = st.recursive(leaves, _extend, max_leaves=24).filter(lambda t: _depth(t) <= 6)


def _safe(ast, x):
    try:
        return eval_expr(ast, x)
    except ExprDomainError:
        return "domain"


@settings(max_examples=150, deadline=None)
@given(trees, st.lists(st.floats(-10, 10, allow_nan=False), min_size=100, max_size=100))
def test_print_parse_round_trip(ast, xs):
    again = parse_expr(to_source(ast))
    for x in xs:
        assert _safe(again, x) == _safe(ast, x)
