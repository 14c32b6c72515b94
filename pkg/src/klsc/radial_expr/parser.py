"""Recursive-descent parser for the radial expression language.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := number | "pi" | "z" | func "(" expr ")" | "(" expr ")"
    func   := "log" | "exp" | "atan" | "abs"

Unary minus binds more loosely than ``^`` so that ``-z^2`` is ``-(z^2)``,
and ``^`` is right-associative.  Exponents must fold to rational constants.
Numbers are read exactly: ``0.1`` is the rational 1/10.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from ..errors import ExpressionSyntaxError, UnknownIdentifier
from .nodes import (
    FUNCTIONS,
    LOCAL,
    PI,
    Z,
    Expr,
    add,
    const,
    div,
    func,
    integral,
    mul,
    neg,
    power,
    sub,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Parser:
    def __init__(self, text: str, internal: bool):
        self.text = text
        self.internal = internal
        self.tokens: list[tuple[str, str, int]] = []
        self._lex()
        self.i = 0

    def _byte(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def _lex(self):
        pos = 0
        text = self.text
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", self._byte(pos))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), self._byte(start)))
            pos = m.end()
        self.tokens.append(("end", "", self._byte(len(text))))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, found {what}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            off = self.take()[2]
            ex = self.unary()
            if not ex.is_const:
                raise ExpressionSyntaxError("exponent must be a rational constant", off)
            return power(base, ex.value)
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return const(Fraction(val))
        if kind == "name":
            if val == "z":
                return Z
            if val == "pi":
                return PI
            internal_funcs = ("sign", "antiderivative") if self.internal else ()
            if val in FUNCTIONS or val in internal_funcs:
                self.expect("(")
                arg = self.expr()
                if val == "antiderivative":
                    self.expect(",")
                    b = self.basepoint()
                    self.expect(")")
                    return integral(arg, b)
                self.expect(")")
                return func(val, arg)
            raise UnknownIdentifier(val, off)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ExpressionSyntaxError(f"unexpected {what}", off)

    def basepoint(self):
        kind, val, off = self.peek()
        if kind == "name" and val in ("inf", LOCAL):
            self.take()
            return math.inf if val == "inf" else LOCAL
        e = self.expr()
        if not e.is_const:
            raise ExpressionSyntaxError("basepoint must be a constant", off)
        return float(e.value)


def parse(text: str, *, internal: bool = False) -> Expr:
    """Parse ``text`` into a simplified expression tree.

    With ``internal=True`` the serialisation-only forms ``sign(...)`` and
    ``antiderivative(expr, basepoint)`` are accepted as well.
    """
    return _Parser(text, internal).parse()
