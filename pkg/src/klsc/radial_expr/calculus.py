"""Symbolic differentiation."""

from __future__ import annotations

from .nodes import (
    ONE,
    ZERO,
    Expr,
    add,
    const,
    div,
    func,
    mul,
    neg,
    power,
    sub,
)


def diff(e: Expr) -> Expr:
    """Exact derivative with respect to z, in simplified form.

    Shared subtrees are differentiated once.  The derivative of an
    ``integral`` node is its integrand; ``abs`` differentiates to ``sign``,
    which fails to evaluate at zero.
    """
    memo: dict = {}

    def d(x: Expr) -> Expr:
        hit = memo.get(x)
        if hit is not None:
            return hit
        op = x.op
        if op in ("const", "pi"):
            out = ZERO
        elif op == "z":
            out = ONE
        elif op == "add":
            out = add(d(x.args[0]), d(x.args[1]))
        elif op == "sub":
            out = sub(d(x.args[0]), d(x.args[1]))
        elif op == "neg":
            out = neg(d(x.args[0]))
        elif op == "mul":
            a, b = x.args
            out = add(mul(d(a), b), mul(a, d(b)))
        elif op == "div":
            a, b = x.args
            da, db = d(a), d(b)
            if db == ZERO:
                out = div(da, b)
            else:
                out = sub(div(da, b), div(mul(a, db), power(b, 2)))
        elif op == "pow":
            u, p = x.args
            out = mul(mul(const(p), power(u, p - 1)), d(u))
        elif op == "log":
            u = x.args[0]
            out = div(d(u), u)
        elif op == "exp":
            u = x.args[0]
            out = mul(x, d(u))
        elif op == "atan":
            u = x.args[0]
            out = div(d(u), add(ONE, power(u, 2)))
        elif op == "abs":
            u = x.args[0]
            out = mul(func("sign", u), d(u))
        elif op == "sign":
            out = ZERO
        elif op == "integral":
            out = x.args[0]
        else:  # pragma: no cover
            raise ValueError(f"unknown node {op}")
        memo[x] = out
        return out

    return d(e)


def nth_derivative(e: Expr, k: int) -> Expr:
    for _ in range(k):
        e = diff(e)
    return e
