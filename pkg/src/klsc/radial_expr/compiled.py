"""Compilation of expression trees to straight-line numpy programs."""

from __future__ import annotations

import math
import threading

import numpy as np

from ..errors import DomainError
from .nodes import LOCAL, Expr, children
from .quadrature import Antiderivative

_lock = threading.RLock()


def _check(x: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{what} is not finite")
    return x


def _pow(x: np.ndarray, p) -> np.ndarray:
    num, den = p.numerator, p.denominator
    if num < 0 and np.any(x == 0):
        raise DomainError("negative power of zero")
    if den == 1:
        with np.errstate(over="ignore"):
            return x ** float(num) if abs(num) > 64 else x ** num
    if den % 2 == 0:
        if np.any(x < 0):
            raise DomainError("even root of a negative number")
        return x ** (num / den)
    # odd root: real branch
    r = np.abs(x) ** (num / den)
    return np.where(x < 0, -r, r) if num % 2 else r


class Program:
    """A compiled expression: instructions indexed over shared subtrees."""

    def __init__(self, expr: Expr):
        self.expr = expr
        self.code: list[tuple] = []
        index: dict = {}
        order: list[Expr] = []
        # iterative post-order over the DAG
        stack = [(expr, False)]
        while stack:
            node, done = stack.pop()
            if node in index:
                continue
            if done:
                index[node] = len(order)
                order.append(node)
                continue
            stack.append((node, True))
            for c in reversed(children(node)):
                if c not in index:
                    stack.append((c, False))
        for node in order:
            op = node.op
            if op == "const":
                self.code.append(("const", float(node.args[0])))
            elif op == "pi":
                self.code.append(("const", math.pi))
            elif op == "z":
                self.code.append(("z",))
            elif op == "pow":
                self.code.append(("pow", index[node.args[0]], node.args[1]))
            elif op == "integral":
                self.code.append(("integral", _antiderivative_of(node)))
            else:
                self.code.append((op, *[index[c] for c in children(node)]))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        shape = z.shape
        zf = z.ravel()
        vals: list = []
        ones = np.ones_like(zf)
        for ins in self.code:
            op = ins[0]
            if op == "const":
                v = ins[1] * ones
            elif op == "z":
                v = zf
            elif op == "add":
                v = vals[ins[1]] + vals[ins[2]]
            elif op == "sub":
                v = vals[ins[1]] - vals[ins[2]]
            elif op == "mul":
                v = vals[ins[1]] * vals[ins[2]]
            elif op == "div":
                den = vals[ins[2]]
                if np.any(den == 0):
                    raise DomainError("division by zero")
                v = vals[ins[1]] / den
            elif op == "neg":
                v = -vals[ins[1]]
            elif op == "pow":
                v = _pow(vals[ins[1]], ins[2])
            elif op == "log":
                x = vals[ins[1]]
                if np.any(x <= 0):
                    raise DomainError("log of a non-positive number")
                v = np.log(x)
            elif op == "exp":
                with np.errstate(over="ignore"):
                    v = np.exp(vals[ins[1]])
            elif op == "atan":
                v = np.arctan(vals[ins[1]])
            elif op == "abs":
                v = np.abs(vals[ins[1]])
            elif op == "sign":
                x = vals[ins[1]]
                if np.any(x == 0):
                    raise DomainError("sign (derivative of abs) is undefined at zero")
                v = np.sign(x)
            elif op == "integral":
                anti = ins[1]
                v = np.zeros_like(zf) if anti is None else anti(zf)
            else:  # pragma: no cover
                raise ValueError(op)
            if op not in ("z", "const"):
                _check(v, op)
            vals.append(v)
        return vals[-1].reshape(shape)


def _antiderivative_of(node: Expr):
    """Antiderivative evaluator cached on the node object itself."""
    with _lock:
        if node._cache is None:
            integrand, basepoint = node.args
            if basepoint == LOCAL:
                node._cache = ("local", None)
            else:
                node._cache = ("anti", Antiderivative(compile_expr(integrand), basepoint))
        return node._cache[1]


def compile_expr(expr: Expr) -> Program:
    return Program(expr)
