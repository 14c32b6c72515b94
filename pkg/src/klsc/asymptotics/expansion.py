"""Expansions at the origin and the regularity of the constructed metrics there."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import (
    AllCoefficientsZero,
    InexactCoefficient,
    NotSmoothAtZero,
    TruncationInsufficient,
)
from ..radial_expr import Expr, RadialFunction, to_string
from ..radial_expr.nodes import children
from .series import LogTaylorSeries, require_taylor

_PADS = (0, 4, 8, 16, 32, 64)


# ------------------------------------------------------------- expression -> series

def _needs_order(s: LogTaylorSeries, N) -> LogTaylorSeries:
    return s if s.order is not None else s.with_order(N)


def _series(e: Expr, N: int, memo: dict) -> LogTaylorSeries:
    hit = memo.get(e)
    if hit is not None:
        return hit
    op = e.op
    S = LogTaylorSeries
    if op == "const":
        out = S.constant(e.value)
    elif op == "z":
        out = S.monomial(1, 1)
    elif op == "pi":
        raise InexactCoefficient("pi has no rational expansion")
    elif op == "integral":
        raise InexactCoefficient("antiderivative nodes have no series expansion")
    else:
        kids = [_series(c, N, memo) for c in children(e)]
        if op == "add":
            out = kids[0] + kids[1]
        elif op == "sub":
            out = kids[0] - kids[1]
        elif op == "mul":
            out = kids[0] * kids[1]
        elif op == "neg":
            out = -kids[0]
        elif op == "div":
            den = kids[1]
            inv = den.reciprocal() if len(den.terms) == 1 and den.order is None else _needs_order(den, N).reciprocal()
            out = kids[0] * inv
        elif op == "pow":
            p = e.args[1]
            base = kids[0]
            if p.denominator == 1 and p >= 0:
                out = base ** int(p)
            elif len(base.terms) == 1 and base.order is None:
                (q, lp), c = next(iter(base.terms.items()))
                if lp:
                    raise NotSmoothAtZero("power of a logarithm")
                out = base.rational_power(p)
            elif p.denominator == 1:
                out = _needs_order(base, N).reciprocal() ** int(-p)
            else:
                out = _needs_order(base, N).rational_power(p)
        elif op == "log":
            u = _needs_order(kids[0], N)
            a, m, w = u._unit_split()
            if a != 1:
                raise InexactCoefficient(f"log({a}) is irrational")
            out = u._compose_unit(w, lambda j: Fraction(0) if j == 0 else Fraction((-1) ** (j + 1), j))
            if m:
                out = out + S.monomial(m, 0, 1)
        elif op == "exp":
            u = _needs_order(kids[0], N)
            _constant_free(u, "exp")
            out = u._compose_unit(u, lambda j: Fraction(1, math.factorial(j)))
        elif op == "atan":
            u = _needs_order(kids[0], N)
            _constant_free(u, "atan")
            out = u._compose_unit(u, lambda j: Fraction(0) if j % 2 == 0 else Fraction((-1) ** (j // 2), j))
        elif op in ("abs", "sign"):
            u = kids[0]
            if not u.terms:
                raise TruncationInsufficient("cannot decide the sign of a series with no terms")
            sgn = 1 if u.leading()[2] > 0 else -1
            out = u.scale(sgn) if op == "abs" else S.constant(sgn)
        else:  # pragma: no cover
            raise ValueError(op)
    memo[e] = out
    return out


def _constant_free(u: LogTaylorSeries, name: str):
    v = u.valuation()
    if v is not None and v < 0:
        raise NotSmoothAtZero(f"{name} of a series with a pole")
    if u.has_logs and any(q <= 0 for q, p in u.terms if p):
        raise NotSmoothAtZero(f"{name} of a logarithm")
    c0 = u.terms.get((Fraction(0), 0), 0)
    if c0 != 0:
        raise InexactCoefficient(f"{name}({c0}) is irrational")


def expansion(e: Expr, order) -> LogTaylorSeries:
    """Series of ``e`` at 0 with every term below ``order`` exact."""
    order = Fraction(order)
    for pad in _PADS:
        s = _series(e, int(math.ceil(order)) + pad, {})
        if s.order is None or s.order >= order:
            return s if s.order is None else s.truncate(order)
    raise TruncationInsufficient(f"could not reach order {order} for {to_string(e)}")


def taylor_series_at_zero(f, order: int) -> LogTaylorSeries:
    """Taylor coefficients of f at 0 for exponents below ``order``."""
    e = f.expr if isinstance(f, RadialFunction) else f
    return require_taylor(expansion(e, order).with_order(order))


def leading_order(f, budget: int = 64) -> int:
    """Smallest k with a nonzero Taylor coefficient."""
    order = 8
    while order <= budget:
        s = taylor_series_at_zero(f, order)
        if s.terms:
            return int(s.valuation())
        order *= 2
    raise AllCoefficientsZero(f"no nonzero Taylor coefficient below order {budget}")


# ------------------------------------------------------------- metric expansion

def default_order(n: int, k: int) -> int:
    return 4 * (k + 1) * (n - 1) + 8


def _profile(pair_or_F) -> Expr:
    F = getattr(pair_or_F, "F", pair_or_F)
    return F.expr if isinstance(F, RadialFunction) else F


def expansion_pieces(F: Expr, n: int, order, constant: Fraction, pad: int):
    """E- and zF-series of the metric built from F, computed from an F-series of order+pad."""
    Fs = taylor_series_at_zero(F, order + pad)
    Fn1 = Fs ** (n - 1)
    integrand = Fn1.reciprocal().shift(-n)
    I = integrand.antiderivative() + (2 * n - 1) * constant
    tail = (Fs ** (n - 2)).reciprocal().shift(-(n - 1)) if n > 2 else LogTaylorSeries.monomial(1, -(n - 1), order=Fs.order)
    second = (I.reciprocal() * tail).scale(-2)
    zF = Fs.shift(1)
    E = zF.derivative() + second
    return E, zF, I


def metric_expansion(pair, order=None, constant=None) -> tuple[LogTaylorSeries, LogTaylorSeries]:
    """(E-series, zF-series) of the metric of an admissible pair near the origin.

    The constant is taken relative to the termwise (formal) antiderivative
    of 1/(z^n F^(n-1)); by default it is the pair's C.  ``formal_constant_offset``
    converts between this convention and the canonical quadrature one.
    """
    n = pair.n
    F = _profile(pair)
    k = leading_order(F)
    T = default_order(n, k) if order is None else Fraction(order)
    C = Fraction(pair.C) if constant is None else Fraction(constant)
    for pad in _PADS:
        E, zF, _ = expansion_pieces(F, n, int(math.ceil(T)), C, pad)
        if E.order >= T and zF.order >= T:
            return E.truncate(T), zF.truncate(T)
    raise TruncationInsufficient(f"series order {T} not reachable")


def omitted_terms(pair, order=None, constant=None, width=1) -> tuple[LogTaylorSeries, LogTaylorSeries]:
    """Terms of the E- and zF-series with exponents in [order, order + width)."""
    n = pair.n
    k = leading_order(_profile(pair))
    T = Fraction(default_order(n, k) if order is None else order)
    E, zF = metric_expansion(pair, T + width, constant)
    keep = lambda s: LogTaylorSeries({key: c for key, c in s.terms.items() if key[0] >= T}, s.order)
    return keep(E), keep(zF)


def magnitude(s: LogTaylorSeries, z: float) -> float:
    """Sum of the absolute values of the terms of s at z."""
    lz = abs(math.log(z))
    return sum(abs(float(c)) * z ** float(q) * lz ** p for (q, p), c in s.terms.items())


def formal_antiderivative(pair, order: int = 80) -> LogTaylorSeries:
    n = pair.n
    Fs = taylor_series_at_zero(_profile(pair), order)
    return (Fs ** (n - 1)).reciprocal().shift(-n).antiderivative()


def formal_constant_offset(pair, z0: float | None = None, order: int = 80) -> float:
    """K with (canonical antiderivative) = (formal series antiderivative) + K.

    Evaluated numerically at a point z0 inside the radius of convergence; a
    pair with constant C in the canonical convention has constant
    C + K/(2n-1) in the formal convention.
    """
    import numpy as np

    from ..radial_expr import compile_expr

    z0 = float(z0) if z0 is not None else min(0.5, 0.5 * pair.domain.midpoint())
    series = formal_antiderivative(pair, order)
    canon = compile_expr(pair.I)(np.array([z0]))[0]
    return float(canon - series(z0))


def aligned_constant(pair, z0: float | None = None) -> Fraction:
    """Formal-convention constant whose series matches the pair's canonical construction."""
    K = formal_constant_offset(pair, z0)
    return Fraction(pair.C) + Fraction(K) / (2 * pair.n - 1)


# ------------------------------------------------------------- cone model

@dataclass(frozen=True)
class ConeModel:
    n: int
    k: int
    leadingCoeff: Fraction
    changeOfVariableConstant: Fraction
    coneScale: Fraction
    fiberFactor: int
    decay: tuple  # r-exponents of the first corrections to dr^2, h, g_CP

    def substitute(self, E_lead: Fraction, zF_lead: Fraction) -> dict:
        """Coefficients of dr^2, r^2 g_CP and r^2 h after r^2 = K z^(k+1).

        E_lead z^k ((d sqrt z)^2 + z h) + zF_lead z^(k+1) g_CP becomes
        a dr^2 + b r^2 g_CP + c r^2 h with the returned a, b, c.
        """
        K, k = self.changeOfVariableConstant, self.k
        return {
            "dr2": Fraction(E_lead) / (K * (k + 1) ** 2),
            "r2_gCP": Fraction(zF_lead) / K,
            "r2_h": Fraction(E_lead) / K,
        }


def cone_model(n: int, k: int, leading_coeff=1) -> ConeModel:
    c = Fraction(leading_coeff)
    if c <= 0:
        raise ValueError("leading coefficient must be positive")
    return ConeModel(
        n=n, k=k, leadingCoeff=c,
        changeOfVariableConstant=Fraction(2 * n - 1, k + 1) * c,
        coneScale=Fraction(k + 1, 2 * n - 1),
        fiberFactor=(k + 1) * (2 * n - 1),
        decay=(Fraction(2, k + 1), Fraction(2 * (k + 2), k + 1), Fraction(2 * (k + 2), k + 1)),
    )


def r_exponent(z_exponent, k: int) -> Fraction:
    """z^d = const * r^(2d/(k+1)) under r^2 proportional to z^(k+1)."""
    return Fraction(2) * Fraction(z_exponent) / (k + 1)


# ------------------------------------------------------------- obstruction

def log_obstruction(F, n: int, k: int | None = None) -> Fraction:
    """d^m/dz^m (z^k/F)^(n-1) at 0 with m = (n-1)(k+1), exactly."""
    e = _profile(F)
    if k is None:
        k = leading_order(e)
    m = (n - 1) * (k + 1)
    Fs = taylor_series_at_zero(e, m + k + 1)
    unit = Fs.shift(-k)
    g = unit.reciprocal() ** (n - 1)
    return g.coefficient(m) * math.factorial(m)


def quotient_check(n: int, k: int) -> tuple[int | None, bool]:
    """(l, nonsingular) with (k+1)(2n-1) = l^2; l is None when not a square."""
    N = (k + 1) * (2 * n - 1)
    r = math.isqrt(N)
    if r * r != N:
        return None, False
    return r, k == 2 * n - 2


# ------------------------------------------------------------- regularity

@dataclass(frozen=True)
class RegularityReport:
    n: int
    k: int
    coneScale: Fraction
    fiberFactor: int
    changeOfVariableConstant: Fraction
    logObstruction: Fraction
    eta: Fraction | None  # None means no non-integral exponent was found
    etaCertified: bool
    etaBound: Fraction | None
    smoothnessClass: str
    quotientOrder: int | None
    nonsingularQuotient: bool
    truncationOrder: Fraction
    notes: tuple = field(default=())

    def to_json(self) -> dict:
        def frac(x):
            return None if x is None else (str(x) if isinstance(x, Fraction) and x.denominator != 1 else int(x))
        return {
            "n": self.n,
            "k": self.k,
            "coneScale": frac(self.coneScale),
            "fiberFactor": self.fiberFactor,
            "changeOfVariableConstant": frac(self.changeOfVariableConstant),
            "logObstruction": frac(self.logObstruction),
            "eta": "inf" if self.eta is None else frac(self.eta),
            "etaCertified": self.etaCertified,
            "etaBound": frac(self.etaBound),
            "smoothnessClass": self.smoothnessClass,
            "quotientOrder": self.quotientOrder,
            "nonsingularQuotient": self.nonsingularQuotient,
            "truncationOrder": frac(self.truncationOrder),
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _is_polynomial(e: Expr) -> bool:
    if e.op in ("const", "z"):
        return True
    if e.op in ("add", "sub", "mul", "neg"):
        return all(_is_polynomial(c) for c in children(e))
    if e.op == "pow":
        p = e.args[1]
        return p.denominator == 1 and p >= 0 and _is_polynomial(e.args[0])
    return False


def _exponent_generators_integral(F: Expr, n: int, k: int) -> bool:
    """For polynomial F: every metric exponent lies in k + (semigroup of F's exponents - k).

    All r-exponents are integral iff (k+1) divides 2e for each generator e.
    """
    coeffs = _poly_exponents(F)
    gens = [q - k for q in coeffs if q > k] + [(n - 1) * (k + 1)]
    return all((2 * g) % (k + 1) == 0 for g in gens)


def _poly_exponents(F: Expr) -> list[int]:
    s = expansion(F, 1)  # polynomials expand exactly
    if s.order is not None:
        raise ValueError("not an exact polynomial expansion")
    return sorted(int(q) for q in s.exponents())


def regularity_class(pair, order=None) -> RegularityReport:
    n = pair.n
    F = _profile(pair)
    k = leading_order(F)
    Fs = taylor_series_at_zero(F, k + 1)
    c = Fs.coefficient(k)
    cone = cone_model(n, k, c) if c > 0 else None
    obstruction = log_obstruction(F, n, k)
    ell, nonsingular = quotient_check(n, k)
    T = Fraction(default_order(n, k) if order is None else order)
    notes = []
    eta = None
    certified = True
    bound = None
    if k >= 2:
        E, zF = metric_expansion(pair, T)
        lead = (Fraction(k), 0)
        found = []
        for (q, p) in E.terms:
            if (q, p) == lead:
                continue
            found.append(r_exponent(q - k, k))      # z^q (d sqrt z)^2 -> r^(2(q-k)/(k+1)) dr^2
            found.append(r_exponent(q + 1, k))      # z^(q+1) h
        for (q, p) in zF.terms:
            if (q, p) != (Fraction(k + 1), 0):
                found.append(r_exponent(q, k))
        fractional = sorted(x for x in found if x.denominator != 1)
        if fractional:
            eta = fractional[0]
        else:
            bound = r_exponent(T - k, k)
            if _is_polynomial(F):
                if not _exponent_generators_integral(F, n, k):
                    raise TruncationInsufficient(
                        "a fractional r-power may occur beyond the computed order")
                notes.append("all r-exponents integral: exponents form a semigroup generated by integral ones")
            else:
                certified = False
                notes.append(f"no fractional r-power below z^{T}; eta >= {bound} (truncation-conditional)")
    if k <= 1:
        cls = "C^inf" if obstruction == 0 else f"C^{2 * n - 3}"
    elif eta is None:
        cls = "C^inf" if obstruction == 0 else f"C^{2 * n - 3}"
    else:
        fl = math.floor(eta)
        cls = f"C^{fl}" if obstruction == 0 else f"C^{min(fl, 2 * n - 3)}"
    return RegularityReport(
        n=n, k=k,
        coneScale=Fraction(k + 1, 2 * n - 1),
        fiberFactor=(k + 1) * (2 * n - 1),
        changeOfVariableConstant=cone.changeOfVariableConstant if cone else Fraction(2 * n - 1, k + 1) * c,
        logObstruction=obstruction,
        eta=eta, etaCertified=certified, etaBound=bound,
        smoothnessClass=cls,
        quotientOrder=ell, nonsingularQuotient=nonsingular,
        truncationOrder=T, notes=tuple(notes),
    )


def a_priori_report(n: int, k: int) -> str:
    """Class guaranteed without any expansion data."""
    return "C^0-a-priori" if k >= 2 else "unknown"
