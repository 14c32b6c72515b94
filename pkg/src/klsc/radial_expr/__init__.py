"""Radial expressions: parsing, evaluation, differentiation and antidifferentiation."""

from .calculus import diff, nth_derivative
from .compiled import Program, compile_expr
from .nodes import (
    LOCAL,
    ONE,
    PI,
    Z,
    ZERO,
    Expr,
    absolute,
    as_expr,
    atan,
    const,
    exp,
    integral,
    log,
    power,
    raw,
    simplify,
    to_string,
)
from .parser import parse
from .quadrature import Antiderivative, integrate
from .radial import (
    Annulus,
    RadialFunction,
    antiderivative,
    canonical_basepoint,
    derivative,
    evaluate,
)

__all__ = [
    "LOCAL", "ONE", "PI", "Z", "ZERO", "Expr", "absolute", "as_expr", "atan",
    "const", "exp", "integral", "log", "power", "raw", "simplify", "to_string",
    "diff", "nth_derivative", "Program", "compile_expr", "parse",
    "Antiderivative", "integrate", "Annulus", "RadialFunction",
    "antiderivative", "canonical_basepoint", "derivative", "evaluate",
]
