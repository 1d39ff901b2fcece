"""Tiny arithmetic grammar for field formulas given as strings.

Supported: + - * / ^, unary minus, parentheses, variables x1..xn and t,
integer/decimal/scientific literals, and the functions sin, cos, exp, tanh.
Formulas compile to closures that broadcast over numpy arrays, so a system
built from them can be evaluated on a whole batch of states at once.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import InputError
from .systems import GeneralSystem

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))")

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip():
                raise InputError(f"unexpected character {text[pos:].strip()[0]!r} "
                                 f"at position {pos} in formula {text!r}")
            break
        if m.lastgroup is None and not m.group().strip():
            pos = m.end()
            continue
        kind = m.lastgroup
        if kind is not None:
            out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, n_vars, text):
        self.tokens = tokens
        self.pos = 0
        self.n_vars = n_vars
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, symbol):
        kind, value = self.take()
        if kind != "op" or value != symbol:
            raise InputError(f"expected {symbol!r} in formula {self.text!r}")

    def parse(self):
        node = self.expr()
        if self.pos != len(self.tokens):
            raise InputError(f"trailing input in formula {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                rhs = self.term()
                if value == "+":
                    node = (lambda a, b: lambda t, x: a(t, x) + b(t, x))(node, rhs)
                else:
                    node = (lambda a, b: lambda t, x: a(t, x) - b(t, x))(node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value = self.peek()
            if kind == "op" and value in "*/":
                self.take()
                rhs = self.unary()
                if value == "*":
                    node = (lambda a, b: lambda t, x: a(t, x) * b(t, x))(node, rhs)
                else:
                    node = (lambda a, b: lambda t, x: a(t, x) / b(t, x))(node, rhs)
            else:
                return node

    def unary(self):
        kind, value = self.peek()
        if kind == "op" and value in "+-":
            self.take()
            inner = self.unary()
            if value == "-":
                return (lambda a: lambda t, x: -a(t, x))(inner)
            return inner
        return self.power()

    def power(self):
        base = self.atom()
        kind, value = self.peek()
        if kind == "op" and value == "^":
            self.take()
            exponent = self.unary()  # right-associative
            return (lambda a, b: lambda t, x: a(t, x) ** b(t, x))(base, exponent)
        return base

    def atom(self):
        kind, value = self.take()
        if kind == "num":
            const = float(value)
            return lambda t, x: const
        if kind == "ident":
            if value == "t":
                return lambda t, x: t
            if value in _FUNCTIONS:
                fn = _FUNCTIONS[value]
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return (lambda f, a: lambda t, x: f(a(t, x)))(fn, inner)
            m = re.fullmatch(r"x(\d+)", value)
            if m:
                idx = int(m.group(1)) - 1
                if not 0 <= idx < self.n_vars:
                    raise InputError(f"variable {value} outside x1..x{self.n_vars} "
                                     f"in formula {self.text!r}")
                return (lambda i: lambda t, x: x[i])(idx)
            raise InputError(f"unknown identifier {value!r} in formula {self.text!r}")
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise InputError(f"malformed formula {self.text!r}")


def parse_formula(text: str, n_vars: int):
    """Compile one formula into a closure f(t, coords) -> value.

    coords is indexable per coordinate; scalars and numpy arrays broadcast.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise InputError("empty formula")
    return _Parser(tokens, n_vars, text).parse()


def build_expression_system(formulas: list[str]) -> GeneralSystem:
    """A batch-capable system whose coordinates follow the given formulas."""
    n = len(formulas)
    if n == 0:
        raise InputError("system needs at least one formula")
    compiled = [parse_formula(f, n) for f in formulas]

    def func(t, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            rows = [np.broadcast_to(np.asarray(fn(t, x), dtype=float), x.shape[1:])
                    if x.ndim > 1 else np.asarray(fn(t, x), dtype=float)
                    for fn in compiled]
        if x.ndim > 1:
            return np.stack([np.array(r, dtype=float) for r in rows])
        return np.array([float(r) for r in rows])

    return GeneralSystem(func, vectorized=True)
