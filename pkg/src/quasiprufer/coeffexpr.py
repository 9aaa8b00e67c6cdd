"""Arithmetic expressions in one variable ``x``.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'

So ``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``. Implicit
multiplication (``2x``) is rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

__all__ = [
    "Const",
    "Var",
    "Unary",
    "Binary",
    "ExprAST",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse_expr",
    "eval_expr",
    "to_source",
    "compile_expr",
]

UNARY_FUNCS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")
BINARY_OPS = ("+", "-", "*", "/", "^")
NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, source: str, position: int):
        super().__init__(f"{message} at position {position} in {source!r}")
        self.source = source
        self.position = position


class ExprDomainError(ArithmeticError):
    """Evaluation left the real domain (ln of non-positive, 1/0, ...)."""

    def __init__(self, message: str, x: float, subexpr: str):
        super().__init__(f"{message} in {subexpr!r} at x={x!r}")
        self.x = x
        self.subexpr = subexpr


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a name from UNARY_FUNCS
    child: "ExprAST"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "ExprAST"
    right: "ExprAST"


ExprAST = Union[Const, Var, Unary, Binary]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", source, bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ExprSyntaxError(message, self.source, tok[2])

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            found = tok[1] or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}", tok)

    def parse(self) -> ExprAST:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.error(f"unexpected trailing token {tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            child = self.unary()
            return Unary("neg", child) if tok[1] == "-" else child
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, text, _ = tok
        if kind == "num":
            node = Const(float(text))
        elif kind == "name":
            if text == "x":
                node = Var()
            elif text in NAMED_CONSTANTS:
                node = Const(NAMED_CONSTANTS[text])
            elif text in UNARY_FUNCS:
                nxt = self.peek()
                if not (nxt[0] == "op" and nxt[1] == "("):
                    raise self.error(f"function {text!r} requires parentheses", nxt)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                node = Unary(text, arg)
            else:
                raise self.error(f"unknown identifier {text!r}", tok)
        elif kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
        elif kind == "end":
            raise self.error("unexpected end of input", tok)
        else:
            raise self.error(f"unexpected token {text!r}", tok)
        nxt = self.peek()
        if nxt[0] in ("num", "name") or (nxt[0] == "op" and nxt[1] == "("):
            raise self.error("implicit multiplication is not allowed", nxt)
        return node


def parse_expr(source: str) -> ExprAST:
    """Parse ``source`` into an AST. Raises :class:`ExprSyntaxError`."""
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", str(source), 0)
    return _Parser(source).parse()


def to_source(ast: ExprAST) -> str:
    """Fully parenthesized text that re-parses to an equivalent AST."""
    if isinstance(ast, Const):
        return repr(ast.value) if ast.value >= 0 else f"(-{-ast.value!r})"
    if isinstance(ast, Var):
        return "x"
    if isinstance(ast, Unary):
        if ast.op == "neg":
            return f"(-{to_source(ast.child)})"
        return f"{ast.op}({to_source(ast.child)})"
    return f"({to_source(ast.left)} {ast.op} {to_source(ast.right)})"


def _domain(message, x, ast):
    return ExprDomainError(message, x, to_source(ast))


def _pow(base, expo):
    return math.pow(base, expo)


_UNARY_IMPL: dict[str, Callable[[float], float]] = {
    "neg": lambda v: -v,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


def eval_expr(ast: ExprAST, x: float) -> float:
    """Evaluate ``ast`` at ``x``; domain violations raise :class:`ExprDomainError`."""
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        return float(x)
    if isinstance(ast, Unary):
        v = eval_expr(ast.child, x)
        if ast.op == "ln" and v <= 0.0:
            raise _domain("logarithm of non-positive value", x, ast)
        if ast.op == "sqrt" and v < 0.0:
            raise _domain("square root of negative value", x, ast)
        try:
            out = _UNARY_IMPL[ast.op](v)
        except (ValueError, OverflowError) as exc:
            raise _domain(str(exc), x, ast) from None
    else:
        lv = eval_expr(ast.left, x)
        rv = eval_expr(ast.right, x)
        op = ast.op
        try:
            if op == "+":
                out = lv + rv
            elif op == "-":
                out = lv - rv
            elif op == "*":
                out = lv * rv
            elif op == "/":
                if rv == 0.0:
                    raise _domain("division by zero", x, ast)
                out = lv / rv
            else:
                out = _pow(lv, rv)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise _domain(str(exc) or "invalid power", x, ast) from None
    if not math.isfinite(out):
        raise _domain("non-finite result", x, ast)
    return out


_PY_FUNCS = {
    "sin": "_m.sin",
    "cos": "_m.cos",
    "tan": "_m.tan",
    "exp": "_m.exp",
    "ln": "_m.log",
    "sqrt": "_m.sqrt",
    "abs": "abs",
}


def _to_python(ast: ExprAST) -> str:
    if isinstance(ast, Const):
        return repr(ast.value)
    if isinstance(ast, Var):
        return "x"
    if isinstance(ast, Unary):
        if ast.op == "neg":
            return f"(-{_to_python(ast.child)})"
        return f"{_PY_FUNCS[ast.op]}({_to_python(ast.child)})"
    left, right = _to_python(ast.left), _to_python(ast.right)
    if ast.op == "^":
        return f"_m.pow({left}, {right})"
    return f"({left} {ast.op} {right})"


def compile_expr(ast: ExprAST) -> Callable[[float], float]:
    """Return a fast ``f(x)`` equivalent to ``eval_expr(ast, x)``.

    The fast path is plain Python arithmetic; on any failure the tree
    evaluator is rerun so the raised error names the offending subexpression.
    """
    code = compile(f"lambda x: {_to_python(ast)}", "<coeffexpr>", "eval")
    fast = eval(code, {"_m": math, "__builtins__": {"abs": abs}})
    isfinite = math.isfinite

    def f(x: float) -> float:
        try:
            v = fast(x)
        except (ValueError, OverflowError, ZeroDivisionError):
            return eval_expr(ast, x)
        if not isfinite(v):
            return eval_expr(ast, x)
        return v

    return f
