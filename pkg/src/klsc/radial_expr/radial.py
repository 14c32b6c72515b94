"""Annuli and radial functions defined on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DivergentIntegral, DomainError, ToleranceNotMet
from .calculus import diff
from .compiled import Program, compile_expr
from .nodes import Expr, as_expr, to_string
from .parser import parse
from .quadrature import integrate

GRID_POINTS = 512
GRID_INSET = 1e-6


@dataclass(frozen=True)
class Annulus:
    """The region alpha < z < beta of squared radii, 0 <= alpha < beta <= inf."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = float(self.alpha), float(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if not (a >= 0 and math.isfinite(a)):
            raise DomainError(f"inner radius must be finite and >= 0, got {a}")
        if not a < b:
            raise DomainError(f"annulus needs alpha < beta, got ({a}, {b})")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.beta)

    def contains(self, z) -> bool | np.ndarray:
        z = np.asarray(z, dtype=float)
        return (z > self.alpha) & (z < self.beta)

    def check(self, z) -> None:
        if not np.all(self.contains(z)):
            raise DomainError(f"z outside the annulus ({self.alpha}, {self.beta})")

    def midpoint(self) -> float:
        """Log-scale midpoint; for an infinite annulus, the midpoint in t = z/(1+z)."""
        a, b = self.alpha, self.beta
        if self.infinite:
            t = 0.5 * (a / (1 + a) + 1.0)
            return t / (1 - t)
        if a == 0:
            return 0.5 * b
        return math.sqrt(a * b)

    def grid(self, points: int = GRID_POINTS, inset: float = GRID_INSET) -> np.ndarray:
        """Chebyshev points in log z (in t = z/(1+z) when beta is infinite), ascending."""
        x = np.cos((2 * np.arange(points) + 1) * np.pi / (2 * points))[::-1]
        if self.infinite:
            ta = self.alpha / (1 + self.alpha)
            d = inset * (1 - ta)
            lo, hi = ta + d, 1 - d
            t = lo + (hi - lo) * (x + 1) / 2
            return t / (1 - t)
        d = inset * (self.beta - self.alpha)
        lo, hi = math.log(self.alpha + d), math.log(self.beta - d)
        return np.exp(lo + (hi - lo) * (x + 1) / 2)

    def to_json(self) -> list:
        return [self.alpha, "inf" if self.infinite else self.beta]

    @classmethod
    def from_json(cls, data) -> "Annulus":
        a, b = data
        return cls(float(a), math.inf if b in ("inf", "Infinity", None) else float(b))

    def __str__(self):
        return f"({self.alpha:g}, {'inf' if self.infinite else format(self.beta, 'g')})"


@dataclass(frozen=True)
class RadialFunction:
    """An expression in z together with the annulus it lives on."""

    expr: Expr
    domain: Annulus

    @classmethod
    def parse(cls, text: str, domain: Annulus, internal: bool = False) -> "RadialFunction":
        return cls(parse(text, internal=internal), domain)

    @classmethod
    def of(cls, e, domain: Annulus) -> "RadialFunction":
        return cls(as_expr(e), domain)

    @cached_property
    def program(self) -> Program:
        return compile_expr(self.expr)

    def __call__(self, z):
        """Evaluate at interior point(s) z; scalars in, float out."""
        zz = np.asarray(z, dtype=float)
        self.domain.check(zz)
        out = self.program(zz)
        return float(out) if out.ndim == 0 else out

    def values(self, z) -> np.ndarray:
        """Evaluate without the annulus check (for stencils that straddle nothing)."""
        return self.program(np.asarray(z, dtype=float))

    def derivative(self) -> "RadialFunction":
        return RadialFunction(diff(self.expr), self.domain)

    def with_expr(self, e) -> "RadialFunction":
        return RadialFunction(as_expr(e), self.domain)

    def __str__(self):
        return to_string(self.expr)


def evaluate(f: RadialFunction, z):
    return f(z)


def derivative(f: RadialFunction) -> RadialFunction:
    return f.derivative()


def converges_at(f: RadialFunction, end: float, start: float) -> bool:
    """Whether the integral of f from ``start`` to the edge ``end`` converges."""
    try:
        integrate(f.program, start, end)
    except (DivergentIntegral, ToleranceNotMet):
        return False
    except DomainError:
        return False
    return True


def canonical_basepoint(f: RadialFunction) -> float:
    """beta if the integral converges there, else the log-scale midpoint.

    With alpha = 0 or beta = inf the log midpoint is undefined and the
    annulus midpoint is used instead (1 for the whole punctured plane).
    """
    dom = f.domain
    mid = dom.midpoint()
    if converges_at(f, dom.beta, mid):
        return dom.beta
    return mid


def antiderivative(f: RadialFunction, basepoint, z) -> float | np.ndarray:
    """Integral of f from ``basepoint`` to z (``basepoint=None`` means canonical)."""
    from .nodes import integral

    if basepoint is None or basepoint == "canonical":
        basepoint = canonical_basepoint(f)
    basepoint = float(basepoint)
    zz = np.asarray(z, dtype=float)
    f.domain.check(zz)
    prog = compile_expr(integral(f.expr, basepoint))
    out = prog(zz)
    return float(out) if out.ndim == 0 else out
