"""Construction of Hermitian metrics with S = 2 S_C.

Two routes:

* from a Kähler potential phi, multiply its metric by the conformal factor
  v^2 = |I + offset|^(2/(2n-1)),  I = integral of 1/(z^n phi'^(n-1));
* from an admissible pair (F, C), build E = (zF)' - 2/(z^(n-1) F^(n-2)) / (I_F + (2n-1)C)
  with I_F the integral of 1/(z^n F^(n-1)), keeping F as the second component.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    DomainError,
    MultipleZeros,
    NotAdmissible,
)
from .geometry import (
    VERIFY_POINTS,
    HermitianMetricRadial,
    KahlerPotentialDeriv,
)
from .radial_expr import (
    Z,
    Annulus,
    Expr,
    RadialFunction,
    absolute,
    canonical_basepoint,
    compile_expr,
    const,
    diff,
    integral,
    power,
    to_string,
)

STRICTNESS = 1e-12


def _basepoint(f: RadialFunction, basepoint) -> float:
    if basepoint is None or basepoint == "canonical":
        return canonical_basepoint(f)
    return math.inf if basepoint in ("inf", math.inf) else float(basepoint)


def _exact(c) -> Fraction:
    """Exact rational for a user constant; floats keep their binary value."""
    if isinstance(c, str):
        return Fraction(c)
    return Fraction(c)


# ------------------------------------------------------------- Kähler route

def potential_integrand(pot: KahlerPotentialDeriv) -> Expr:
    n = pot.n
    return 1 / (power(Z, n) * power(pot.dphi.expr, n - 1))


@dataclass(frozen=True)
class ConformalFactor:
    """v^2 = scale^2 |I + offset|^(2/(2n-1)) together with its ingredients."""

    vsq: RadialFunction
    antiderivative: RadialFunction  # I + offset, the signed quantity under |.|
    basepoint: float
    scale: float
    offset: float


def conformal_factor(pot: KahlerPotentialDeriv, basepoint=None, scale: float = 1.0,
                     offset: float = 0.0) -> ConformalFactor:
    n = pot.n
    integrand = RadialFunction(potential_integrand(pot), pot.domain)
    b = _basepoint(integrand, basepoint)
    inner = integral(integrand.expr, b) + const(_exact(offset))
    vsq = const(_exact(scale) ** 2) * power(absolute(inner), Fraction(2, 2 * n - 1))
    return ConformalFactor(RadialFunction(vsq, pot.domain), RadialFunction(inner, pot.domain),
                           b, float(scale), float(offset))


def klsc_conformal_factor(pot: KahlerPotentialDeriv, basepoint=None, scale: float = 1.0,
                          offset: float = 0.0) -> RadialFunction:
    """The squared conformal factor v^2 turning the Kähler metric of phi' into a Klsc metric."""
    return conformal_factor(pot, basepoint, scale, offset).vsq


@dataclass(frozen=True)
class SplitResult:
    pieces: tuple
    gamma: float | None


def _signed_part(vsq: RadialFunction) -> RadialFunction:
    """The quantity inside |.| of a conformal factor, or vsq itself."""
    e = vsq.expr
    if e.op == "mul" and e.args[0].is_const:
        e = e.args[1]
    if e.op == "pow" and e.args[0].op == "abs":
        return RadialFunction(e.args[0].args[0], vsq.domain)
    return vsq


def split_at_factor_zero(vsq, domain: Annulus | None = None, points: int = VERIFY_POINTS) -> SplitResult:
    """Split the annulus where the antiderivative under the conformal factor changes sign."""
    if isinstance(vsq, ConformalFactor):
        signed = vsq.antiderivative
        domain = domain or signed.domain
    else:
        domain = domain or vsq.domain
        signed = _signed_part(vsq)
    signed = RadialFunction(signed.expr, domain)
    zs = domain.grid(points)
    vals = signed(zs)
    s = np.sign(vals)
    changes = np.nonzero(s[:-1] * s[1:] < 0)[0]
    exact_zeros = np.nonzero(s == 0)[0]
    if len(changes) + len(exact_zeros) == 0:
        return SplitResult((domain,), None)
    if len(changes) + len(exact_zeros) > 1:
        raise MultipleZeros(f"conformal factor vanishes more than once on {domain}")
    if len(exact_zeros):
        gamma = float(zs[exact_zeros[0]])
    else:
        i = changes[0]
        gamma = _find_root(signed, float(zs[i]), float(zs[i + 1]))
    return SplitResult((Annulus(domain.alpha, gamma), Annulus(gamma, domain.beta)), gamma)


def _find_root(f: RadialFunction, lo: float, hi: float) -> float:
    """Bisection on a sign change, then Newton polish with the derivative."""
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= 1e-12 * mid:
            break
    x = 0.5 * (lo + hi)
    df = f.derivative()
    for _ in range(3):
        d = df(x)
        if d == 0:
            break
        nx = x - f(x) / d
        if not lo - (hi - lo) <= nx <= hi + (hi - lo):
            break
        x = nx
    return x


# ------------------------------------------------------------- pairs

@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool
    violation: float | None
    margin: float

    def __bool__(self):
        return self.admissible

    def to_json(self) -> dict:
        return {"admissible": self.admissible, "violation": self.violation, "margin": self.margin}


@dataclass(frozen=True)
class AdmissiblePair:
    """A profile F and constant C; C is relative to the canonical antiderivative."""

    n: int
    F: RadialFunction
    C: Fraction
    domain: Annulus
    basepoint: float | str | None = None
    points: int = field(default=VERIFY_POINTS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "C", _exact(self.C))
        if self.F.domain != self.domain:
            object.__setattr__(self, "F", RadialFunction(self.F.expr, self.domain))

    @classmethod
    def from_strings(cls, n: int, F: str, C, domain: Annulus, basepoint=None) -> "AdmissiblePair":
        return cls(n, RadialFunction.parse(F, domain), _exact(C), domain, basepoint)

    @cached_property
    def base(self) -> float:
        return _basepoint(RadialFunction(self.integrand, self.domain), self.basepoint)

    @cached_property
    def integrand(self) -> Expr:
        n = self.n
        return 1 / (power(Z, n) * power(self.F.expr, n - 1))

    @cached_property
    def I(self) -> Expr:
        return integral(self.integrand, self.base)

    @cached_property
    def Q(self) -> Expr:
        """I/(2n-1) + C"""
        return self.I / (2 * self.n - 1) + const(self.C)

    @cached_property
    def E_expr(self) -> Expr:
        n, F = self.n, self.F.expr
        Ct = (2 * n - 1) * self.C
        return diff(Z * F) - 2 / (power(Z, n - 1) * power(F, n - 2)) / (self.I + const(Ct))

    @cached_property
    def monotone_expr(self) -> Expr:
        """d/dz of z F Q^-2, the quantity whose positivity defines admissibility."""
        return diff(Z * self.F.expr * power(self.Q, -2))

    @cached_property
    def verdict(self) -> AdmissibilityVerdict:
        return is_admissible(self)

    def to_json(self) -> dict:
        b = self.basepoint
        if b is None:
            b = "canonical"
        elif isinstance(b, float) and math.isinf(b):
            b = "inf"
        return {"n": self.n, "F": to_string(self.F.expr), "C": float(self.C),
                "annulus": self.domain.to_json(), "basepoint": b}

    @classmethod
    def from_json(cls, data) -> "AdmissiblePair":
        if isinstance(data, str):
            data = json.loads(data)
        b = data.get("basepoint", "canonical")
        if b == "inf":
            b = math.inf
        elif b == "canonical":
            b = None
        return cls.from_strings(int(data["n"]), data["F"], str(data["C"]),
                                Annulus.from_json(data["annulus"]), b)


def _pointwise(prog, zs: np.ndarray) -> np.ndarray:
    """Evaluate a program, with NaN wherever it is undefined."""
    try:
        return prog(zs)
    except DomainError:
        out = np.full(zs.shape, np.nan)
        for i, z in enumerate(zs):
            try:
                out[i] = prog(np.array([z]))[0]
            except DomainError:
                pass
        return out


def is_admissible(pair: AdmissiblePair) -> AdmissibilityVerdict:
    """z F (I/(2n-1) + C)^-2 must be strictly increasing on the grid, with F > 0.

    The reported violation is the smallest grid point where positivity of F
    or strict monotonicity fails, or where the construction is undefined.
    """
    zs = pair.domain.grid(pair.points)
    F = _pointwise(pair.F.program, zs)
    prog = compile_expr(pair.monotone_expr)
    d = _pointwise(prog, zs)
    scale = np.abs(_pointwise(compile_expr(diff(Z * pair.F.expr) * power(pair.Q, -2)), zs))
    scale = np.where(np.isfinite(scale), np.maximum(scale, 1e-300), 1e-300)
    rel = d / scale
    bad = ~(F > 0) | ~(d > STRICTNESS * scale)
    for i in np.nonzero(bad)[0]:
        if F[i] > 0 and d[i] > 0:
            # barely positive: refine around the point before rejecting
            lo = zs[max(i - 1, 0)]
            hi = zs[min(i + 1, len(zs) - 1)]
            sub = np.linspace(lo, hi, 9)[1:-1]
            sub = sub[pair.domain.contains(sub)]
            if np.any(_pointwise(prog, sub) > STRICTNESS * scale[i]):
                continue
        margin = float(np.nanmin(rel)) if np.any(np.isfinite(rel)) else float("-inf")
        return AdmissibilityVerdict(False, float(zs[i]), margin)
    return AdmissibilityVerdict(True, None, float(np.min(rel)))


def recover_potential_derivative(pair: AdmissiblePair) -> KahlerPotentialDeriv:
    """phi' = F (I/(2n-1) + C)^-2"""
    if not pair.verdict:
        raise NotAdmissible(f"pair is not admissible (violation at z = {pair.verdict.violation})")
    return KahlerPotentialDeriv.of(pair.n, pair.domain, pair.F.expr * power(pair.Q, -2))


@dataclass(frozen=True)
class KlscConstruction:
    metric: HermitianMetricRadial
    recoveredPotential: KahlerPotentialDeriv
    conformalFactorSquared: RadialFunction
    pieces: tuple = ()
    gamma: float | None = None

    def on_pieces(self) -> list[HermitianMetricRadial]:
        pieces = self.pieces or (self.metric.domain,)
        return [self.metric.restrict(p) for p in pieces]


def build_klsc_metric(pair: AdmissiblePair) -> KlscConstruction:
    if not pair.verdict:
        raise NotAdmissible(f"pair is not admissible (violation at z = {pair.verdict.violation})")
    pot = recover_potential_derivative(pair)
    metric = HermitianMetricRadial.from_exprs(pair.n, pair.domain, pair.E_expr, pair.F.expr)
    return KlscConstruction(metric, pot, RadialFunction(power(pair.Q, 2), pair.domain),
                            (pair.domain,), None)


def klsc_from_potential(pot: KahlerPotentialDeriv, basepoint=None, scale: float = 1.0,
                        offset: float = 0.0) -> KlscConstruction:
    cf = conformal_factor(pot, basepoint, scale, offset)
    split = split_at_factor_zero(cf)
    v2 = cf.vsq.expr
    metric = HermitianMetricRadial.from_exprs(pot.n, pot.domain, v2 * pot.E.expr, v2 * pot.dphi.expr)
    return KlscConstruction(metric, pot, cf.vsq, split.pieces, split.gamma)
