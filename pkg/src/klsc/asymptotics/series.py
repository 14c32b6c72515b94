"""Truncated expansions  sum_q sum_p c_{q,p} z^q log(z)^p  with exact rational data.

Exponents q are rationals, log powers p are non-negative integers.  A series
knows every term with exponent below ``order``; nothing is claimed at or
above it.  ``order = None`` marks an exact (finite) expression.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from ..errors import InexactCoefficient, NotSmoothAtZero

Key = tuple  # (Fraction exponent, int log power)


def _min(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add(a, b):
    return None if a is None or b is None else a + b


class LogTaylorSeries:
    __slots__ = ("terms", "order")

    def __init__(self, terms: dict | None = None, order=None):
        self.order = None if order is None else Fraction(order)
        clean = {}
        for (q, p), c in (terms or {}).items():
            q, c = Fraction(q), Fraction(c)
            if c != 0 and (self.order is None or q < self.order):
                clean[(q, int(p))] = c
        self.terms = clean

    # construction helpers
    @classmethod
    def monomial(cls, coeff, exponent=0, log_power=0, order=None) -> "LogTaylorSeries":
        return cls({(Fraction(exponent), log_power): Fraction(coeff)}, order)

    @classmethod
    def constant(cls, c, order=None) -> "LogTaylorSeries":
        return cls.monomial(c, 0, 0, order)

    @classmethod
    def from_plain(cls, coeffs: dict, order=None) -> "LogTaylorSeries":
        return cls({(Fraction(q), 0): c for q, c in coeffs.items()}, order)

    # views
    @property
    def plain(self) -> dict:
        return {q: c for (q, p), c in sorted(self.terms.items()) if p == 0}

    @property
    def logPart(self) -> dict:
        """Coefficients of z^s log(z) (log power one)."""
        return {q: c for (q, p), c in sorted(self.terms.items()) if p == 1}

    @property
    def max_log_power(self) -> int:
        return max((p for _, p in self.terms), default=0)

    @property
    def has_logs(self) -> bool:
        return any(p > 0 for _, p in self.terms)

    def coefficient(self, exponent, log_power: int = 0) -> Fraction:
        q = Fraction(exponent)
        if self.order is not None and q >= self.order:
            raise ValueError(f"coefficient of z^{q} lies beyond the truncation order {self.order}")
        return self.terms.get((q, log_power), Fraction(0))

    def valuation(self):
        """Lowest exponent present (order if none, None for the exact zero)."""
        if self.terms:
            return min(q for q, _ in self.terms)
        return self.order

    def leading(self) -> tuple:
        """(exponent, log power, coefficient) of the dominant term near 0."""
        if not self.terms:
            raise ValueError("no terms below the truncation order")
        q = self.valuation()
        p = max(p for qq, p in self.terms if qq == q)
        return q, p, self.terms[(q, p)]

    def exponents(self) -> list:
        return sorted({q for q, _ in self.terms})

    def truncate(self, order) -> "LogTaylorSeries":
        return LogTaylorSeries(self.terms, _min(self.order, Fraction(order)))

    def __eq__(self, other):
        if not isinstance(other, LogTaylorSeries):
            return NotImplemented
        return self.terms == other.terms and self.order == other.order

    def __repr__(self):
        parts = []
        for (q, p), c in sorted(self.terms.items()):
            s = f"{c}*z^{q}"
            if p:
                s += f"*log(z)^{p}" if p > 1 else "*log(z)"
            parts.append(s)
        tail = f" + O(z^{self.order})" if self.order is not None else ""
        return "LogTaylorSeries(" + (" + ".join(parts) or "0") + tail + ")"

    # ring operations
    def __add__(self, other):
        other = _coerce(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return LogTaylorSeries(terms, _min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return LogTaylorSeries({k: -c for k, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def scale(self, c) -> "LogTaylorSeries":
        c = Fraction(c)
        return LogTaylorSeries({k: c * v for k, v in self.terms.items()}, self.order)

    def shift(self, exponent) -> "LogTaylorSeries":
        """Multiply by z^exponent."""
        e = Fraction(exponent)
        return LogTaylorSeries({(q + e, p): c for (q, p), c in self.terms.items()},
                               _add(self.order, e))

    def __mul__(self, other):
        other = _coerce(other)
        if not isinstance(other, LogTaylorSeries):
            return NotImplemented
        va, vb = self.valuation(), other.valuation()
        order = _min(_add(self.order, vb), _add(other.order, va))
        terms: dict = {}
        for (qa, pa), ca in self.terms.items():
            for (qb, pb), cb in other.terms.items():
                q = qa + qb
                if order is not None and q >= order:
                    continue
                k = (q, pa + pb)
                terms[k] = terms.get(k, 0) + ca * cb
        return LogTaylorSeries(terms, order)

    __rmul__ = __mul__

    def _unit_split(self):
        """self = a z^m (1 + w) with w of positive valuation and no logs at order m."""
        if not self.terms:
            raise ZeroDivisionError("series has no terms below its truncation order")
        m = self.valuation()
        if any(p > 0 and q <= m for q, p in self.terms):
            raise ValueError("leading term carries a logarithm; not a unit")
        a = self.terms[(m, 0)]
        w = self.shift(-m).scale(1 / a) - 1
        return a, m, w

    def _compose_unit(self, w: "LogTaylorSeries", coeff) -> "LogTaylorSeries":
        """sum_j coeff(j) w^j up to the truncation order of w."""
        result = LogTaylorSeries.constant(coeff(0), w.order)
        if not w.terms:
            return result
        if w.order is None:
            raise ValueError("an infinite expansion needs a truncation order")
        if w.valuation() <= 0:
            raise ValueError("composition needs a series of positive valuation")
        power = LogTaylorSeries.constant(1)
        j = 0
        while True:
            j += 1
            power = power * w
            if power.valuation() >= w.order:
                break
            c = coeff(j)
            if c != 0:
                result = result + power.scale(c)
        return result

    def reciprocal(self) -> "LogTaylorSeries":
        a, m, w = self._unit_split()
        inv = self._compose_unit(w, lambda j: (-1) ** j)
        return inv.scale(1 / a).shift(-m)

    def with_order(self, order) -> "LogTaylorSeries":
        """Declare a truncation order for an exact series."""
        return LogTaylorSeries(self.terms, _min(self.order, Fraction(order)))

    def __truediv__(self, other):
        other = _coerce(other)
        return self * other.reciprocal()

    def __pow__(self, k):
        k = Fraction(k)
        if k.denominator == 1 and k >= 0:
            result = LogTaylorSeries.constant(1)
            base = self
            e = int(k)
            while e:
                if e & 1:
                    result = result * base
                base = base * base
                e >>= 1
            return result
        return self.rational_power(k)

    def rational_power(self, k) -> "LogTaylorSeries":
        """self^k via the binomial series; the leading coefficient must have an exact k-th power."""
        k = Fraction(k)
        a, m, w = self._unit_split()
        lead = _rational_power(a, k)
        def binom(j):
            c = Fraction(1)
            for i in range(j):
                c *= (k - i) / (i + 1)
            return c
        body = self._compose_unit(w, binom)
        return body.scale(lead).shift(m * k)

    # calculus
    def derivative(self) -> "LogTaylorSeries":
        terms: dict = {}
        for (q, p), c in self.terms.items():
            if q != 0:
                k = (q - 1, p)
                terms[k] = terms.get(k, 0) + c * q
            if p > 0:
                k = (q - 1, p - 1)
                terms[k] = terms.get(k, 0) + c * p
        return LogTaylorSeries(terms, _add(self.order, -1))

    def antiderivative(self) -> "LogTaylorSeries":
        """Termwise antiderivative with zero constant; z^-1 log^p integrates to log^(p+1)/(p+1)."""
        terms: dict = {}
        for (q, p), c in self.terms.items():
            if q == -1:
                k = (Fraction(0), p + 1)
                terms[k] = terms.get(k, 0) + c / (p + 1)
                continue
            # integral z^q log^p = z^(q+1) sum_i (-1)^i p!/(p-i)! log^(p-i) / (q+1)^(i+1)
            falling = Fraction(1)
            for i in range(p + 1):
                k = (q + 1, p - i)
                terms[k] = terms.get(k, 0) + c * (-1) ** i * falling / (q + 1) ** (i + 1)
                falling *= p - i
        return LogTaylorSeries(terms, _add(self.order, 1))

    # numerics and serialisation
    def __call__(self, z):
        import numpy as np

        z = np.asarray(z, dtype=float)
        lz = np.log(z)
        total = np.zeros_like(z)
        for (q, p), c in sorted(self.terms.items()):
            total = total + float(c) * z ** float(q) * lz ** p
        return total

    def dump(self) -> list:
        """[exp_num, exp_den, coeff_num, coeff_den, log_power] rows, sorted."""
        return [[q.numerator, q.denominator, c.numerator, c.denominator, p]
                for (q, p), c in sorted(self.terms.items())]

    @classmethod
    def load(cls, rows: Iterable, order=None) -> "LogTaylorSeries":
        return cls({(Fraction(a, b), int(p)): Fraction(c, d) for a, b, c, d, p in rows}, order)

    def next_term_bound(self, z: float) -> float:
        """Size of a generic term at the truncation order, |z|^order (1 + |log z|)^L."""
        if self.order is None:
            return 0.0
        return abs(z) ** float(self.order) * (1 + abs(math.log(z))) ** self.max_log_power


def _coerce(x) -> LogTaylorSeries:
    if isinstance(x, LogTaylorSeries):
        return x
    return LogTaylorSeries.constant(Fraction(x))


def _rational_power(a: Fraction, k: Fraction) -> Fraction:
    if k.denominator == 1:
        return a ** int(k)
    from ..radial_expr.nodes import _exact_root

    root = _exact_root(a, k.denominator)
    if root is None:
        raise InexactCoefficient(f"{a}^{k} is not rational")
    return root ** k.numerator


def require_taylor(s: LogTaylorSeries) -> LogTaylorSeries:
    """Reject expansions with logarithms, negative or fractional exponents."""
    for q, p in s.terms:
        if p > 0 or q < 0 or q.denominator != 1:
            raise NotSmoothAtZero(f"term z^{q} log^{p} is not smooth at 0")
    return s
