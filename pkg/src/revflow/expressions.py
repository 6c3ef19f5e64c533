"""Tiny arithmetic-expression interpreter for warp functions and profiles.

Config files describe custom ambient spaces and initial profiles with
closed-form strings such as ``cosh(r)^2`` or ``1 + 0.1*cos(pi*z)``.  This
module compiles those strings into callables that evaluate on floats or
numpy arrays.

Grammar (``^`` is right-associative power)::

    expr  := term  (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ['^' unary]
    atom  := NUMBER | 'pi' | <variable> | FUNC '(' expr ')' | '(' expr ')'

with FUNC one of sin, cos, sinh, cosh, exp, log, sqrt.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np

__all__ = ["ExpressionError", "compile_expression"]

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}

_TOKEN_RE = re.compile(
    r"""(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[()+\-*/^])
    """,
    re.VERBOSE,
)


class ExpressionError(ValueError):
    """Raised when an expression cannot be tokenized or parsed."""


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r} at position {pos}")
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group()), pos))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group(), pos))
        else:
            tokens.append(("op", m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, var):
        self.tokens = tokens
        self.var = var
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ExpressionError("unexpected end of expression")
        self.i += 1
        return tok

    def expect_op(self, symbol):
        tok = self.take()
        if tok[0] != "op" or tok[1] != symbol:
            raise ExpressionError(f"expected {symbol!r} at position {tok[2]}")

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ExpressionError(f"trailing input at position {tok[2]}")
        return node

    def expr(self):
        node = self.term()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "+-":
            self.take()
            rhs = self.term()
            if tok[1] == "+":
                node = (lambda l, r: lambda x: l(x) + r(x))(node, rhs)
            else:
                node = (lambda l, r: lambda x: l(x) - r(x))(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while (tok := self.peek()) and tok[0] == "op" and tok[1] in "*/":
            self.take()
            rhs = self.unary()
            if tok[1] == "*":
                node = (lambda l, r: lambda x: l(x) * r(x))(node, rhs)
            else:
                node = (lambda l, r: lambda x: l(x) / r(x))(node, rhs)
        return node

    def unary(self):
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.take()
            inner = self.unary()
            return lambda x: -inner(x)
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.take()
            exponent = self.unary()
            return lambda x: base(x) ** exponent(x)
        return base

    def atom(self):
        tok = self.take()
        if tok[0] == "num":
            value = tok[1]
            return lambda x: value
        if tok[0] == "name":
            name = tok[1]
            if name == "pi":
                return lambda x: np.pi
            if name == self.var:
                return lambda x: x
            if name in _FUNCTIONS:
                fn = _FUNCTIONS[name]
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return lambda x: fn(inner(x))
            raise ExpressionError(f"unknown name {name!r} at position {tok[2]}")
        if tok[1] == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ExpressionError(f"unexpected token {tok[1]!r} at position {tok[2]}")


def compile_expression(text: str, var: str = "r") -> Callable:
    """Compile ``text`` into a callable of the single variable ``var``.

    The callable accepts floats or numpy arrays and returns a matching
    float or array (constant expressions broadcast to the input shape).
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    node = _Parser(tokens, var).parse()

    def evaluate(x):
        arr = np.asarray(x, dtype=float)
        out = node(arr)
        out = np.asarray(out, dtype=float)
        if out.shape != arr.shape:
            out = np.full(arr.shape, float(out))
        return float(out) if arr.shape == () else out

    evaluate.source = text  # type: ignore[attr-defined]
    return evaluate
