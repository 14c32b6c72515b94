"""Expression trees for functions of the radial variable z.

Nodes are immutable and compare structurally.  The module-level builders
(``add``, ``mul``, ...) apply the conservative simplifier as they go, so any
tree built through them is already in normal form.  ``raw`` bypasses the
simplifier and is used to build deliberately unsimplified trees.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

# Sentinel basepoint for an antiderivative normalised to vanish at the point
# where it is evaluated.  Only valid for quantities that do not depend on the
# constant of integration.
LOCAL = "local"

FUNCTIONS = ("log", "exp", "atan", "abs")
INTERNAL_FUNCTIONS = ("sign",)
BINARY = ("add", "sub", "mul", "div")

Number = Union[int, Fraction, float]


class Expr:
    """A node of a radial expression.

    ``op`` is one of: const, pi, z, add, sub, mul, div, neg, pow, log, exp,
    atan, abs, sign, integral.  ``args`` holds child nodes, except that
    const stores its Fraction value, pow stores (base, Fraction exponent) and
    integral stores (integrand, basepoint).
    """

    __slots__ = ("op", "args", "key", "_hash", "_cache")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args
        parts, hashes = [], []
        for a in args:
            if isinstance(a, Expr):
                parts.append(a.key)
                hashes.append(a._hash)
            else:
                parts.append(a)
                hashes.append(hash(a))
        self.key = (op, *parts)
        # built from the children's cached hashes; hashing the key itself is quadratic in depth
        self._hash = hash((op, *hashes))
        self._cache = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    # arithmetic sugar, always through the simplifying builders
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return sub(self, as_expr(o))

    def __rsub__(self, o):
        return sub(as_expr(o), self)

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return div(self, as_expr(o))

    def __rtruediv__(self, o):
        return div(as_expr(o), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, Fraction(p))

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    @property
    def value(self) -> Fraction:
        if self.op != "const":
            raise TypeError("not a constant node")
        return self.args[0]


def raw(op: str, *args) -> Expr:
    """Build a node without simplification."""
    if op == "const":
        return Expr("const", (Fraction(args[0]),))
    if op == "pow":
        return Expr("pow", (args[0], Fraction(args[1])))
    return Expr(op, tuple(args))


def const(v: Number) -> Expr:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("constants must be finite")
        v = Fraction(v)
    return Expr("const", (Fraction(v),))


ZERO = const(0)
ONE = const(1)
Z = Expr("z", ())
PI = Expr("pi", ())


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction, float)):
        return const(v)
    raise TypeError(f"cannot convert {type(v).__name__} to an expression")


def _is(e: Expr, v) -> bool:
    return e.op == "const" and e.args[0] == v


def add(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Expr("add", (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return Expr("sub", (a, b))


def _base_exp(e: Expr) -> tuple[Expr, Fraction]:
    if e.op == "pow":
        return e.args[0], e.args[1]
    return e, Fraction(1)


def mul(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const:
        return const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if a.is_const and b.op == "mul" and b.args[0].is_const:
        return mul(const(a.value * b.args[0].value), b.args[1])
    if not a.is_const and not b.is_const:
        ba, pa = _base_exp(a)
        bb, pb = _base_exp(b)
        if ba == bb:
            return power(ba, pa + pb)
    return Expr("mul", (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if a.is_const and b.is_const and b.value != 0:
        return const(a.value / b.value)
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return ZERO
    return Expr("div", (a, b))


def neg(a: Expr) -> Expr:
    if a.is_const:
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def _exact_root(v: Fraction, q: int) -> Fraction | None:
    """Exact rational q-th root of v, or None."""
    if v < 0:
        if q % 2 == 0:
            return None
        r = _exact_root(-v, q)
        return None if r is None else -r

    def iroot(n: int) -> int | None:
        if n == 0:
            return 0
        r = round(n ** (1.0 / q)) if n < 2**1000 else None
        if r is None:
            return None
        for c in (r - 1, r, r + 1):
            if c >= 0 and c**q == n:
                return c
        return None

    num, den = iroot(v.numerator), iroot(v.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def power(a: Expr, p: Number) -> Expr:
    p = Fraction(p)
    if p == 0:
        return ONE
    if p == 1:
        return a
    if a.is_const:
        v = a.value
        if v == 0 and p < 0:
            return Expr("pow", (a, p))
        if p.denominator == 1:
            return const(v ** p.numerator)
        root = _exact_root(v, p.denominator)
        if root is not None:
            return const(root ** p.numerator)
        return Expr("pow", (a, p))
    if a.op == "pow" and p.denominator == 1:
        return power(a.args[0], a.args[1] * p)
    return Expr("pow", (a, p))


def func(name: str, a: Expr) -> Expr:
    if a.is_const:
        v = a.value
        if name == "log" and v == 1:
            return ZERO
        if name in ("exp",) and v == 0:
            return ONE
        if name == "atan" and v == 0:
            return ZERO
        if name == "abs":
            return const(abs(v))
        if name == "sign" and v != 0:
            return const(1 if v > 0 else -1)
    return Expr(name, (a,))


def log(a: Expr) -> Expr:
    return func("log", as_expr(a))


def exp(a: Expr) -> Expr:
    return func("exp", as_expr(a))


def atan(a: Expr) -> Expr:
    return func("atan", as_expr(a))


def absolute(a: Expr) -> Expr:
    return func("abs", as_expr(a))


def integral(integrand: Expr, basepoint) -> Expr:
    """Antiderivative of ``integrand`` vanishing at ``basepoint``.

    ``basepoint`` is a positive float, ``math.inf`` or ``LOCAL``.
    """
    if basepoint != LOCAL:
        basepoint = float(basepoint)
    if _is(integrand, 0):
        return ZERO
    return Expr("integral", (integrand, basepoint))


_BUILDERS = {"add": add, "sub": sub, "mul": mul, "div": div}


def rebuild(e: Expr, children: list) -> Expr:
    """Reassemble node ``e`` from new children through the simplifying builders."""
    op = e.op
    if op in _BUILDERS:
        return _BUILDERS[op](children[0], children[1])
    if op == "neg":
        return neg(children[0])
    if op == "pow":
        return power(children[0], e.args[1])
    if op in FUNCTIONS or op in INTERNAL_FUNCTIONS:
        return func(op, children[0])
    if op == "integral":
        return integral(children[0], e.args[1])
    return e


def children(e: Expr) -> list:
    if e.op in ("const", "pi", "z"):
        return []
    if e.op in ("pow", "integral"):
        return [e.args[0]]
    return list(e.args)


def simplify(e: Expr) -> Expr:
    """Normal form under the conservative simplifier."""
    memo: dict = {}

    def go(x: Expr) -> Expr:
        hit = memo.get(x)
        if hit is not None:
            return hit
        kids = children(x)
        out = rebuild(x, [go(c) for c in kids]) if kids else x
        memo[x] = out
        return out

    return go(e)


def contains(e: Expr, op: str) -> bool:
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if x.op == op:
            return True
        if x in seen:
            continue
        seen.add(x)
        stack.extend(children(x))
    return False


def size(e: Expr) -> int:
    """Number of distinct subtrees."""
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        stack.extend(children(x))
    return len(seen)


# ---------------------------------------------------------------- printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_ATOM = 5


def _fmt_float(x: float) -> str:
    return "inf" if math.isinf(x) else repr(x)


def _const_text(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        return (str(v.numerator), _ATOM if v >= 0 else 3)
    return (f"{v.numerator}/{v.denominator}", 2)


def _prec(e: Expr) -> int:
    if e.op == "const":
        return _const_text(e.value)[1]
    return _PREC.get(e.op, _ATOM)


def to_string(e: Expr) -> str:
    """Render ``e`` in the input grammar; parsing the result rebuilds ``simplify(e)``."""
    memo: dict = {}

    def wrap(x: Expr, need: int) -> str:
        s = go(x)
        return f"({s})" if _prec(x) < need else s

    def go(x: Expr) -> str:
        hit = memo.get(x)
        if hit is not None:
            return hit
        op = x.op
        if op == "const":
            s = _const_text(x.value)[0]
        elif op == "pi":
            s = "pi"
        elif op == "z":
            s = "z"
        elif op in ("add", "sub"):
            sym = " + " if op == "add" else " - "
            s = wrap(x.args[0], 1) + sym + wrap(x.args[1], 2)
        elif op in ("mul", "div"):
            sym = "*" if op == "mul" else "/"
            s = wrap(x.args[0], 2) + sym + wrap(x.args[1], 3)
        elif op == "neg":
            s = "-" + wrap(x.args[0], 3 if x.args[0].op == "neg" else 4)
        elif op == "pow":
            p = x.args[1]
            ps = str(p.numerator) if (p.denominator == 1 and p >= 0) else f"({p})"
            s = wrap(x.args[0], _ATOM) + "^" + ps
        elif op == "integral":
            s = f"antiderivative({go(x.args[0])}, {_fmt_float(x.args[1]) if x.args[1] != LOCAL else LOCAL})"
        else:
            s = f"{op}({go(x.args[0])})"
        memo[x] = s
        return s

    return go(e)
