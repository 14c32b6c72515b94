"""U(n)-invariant Hermitian metrics in component form.

A metric is described by two radial functions E and F:

    g = E((d sqrt z)^2 + z h) + z F g_CP

where h is the Hopf fibre metric and g_CP the Fubini-Study metric on the
base.  It is Kähler exactly when E = (zF)'.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateMetric, DomainError, NotKahler
from .radial_expr import (
    Z,
    Annulus,
    RadialFunction,
    as_expr,
    diff,
    exp,
    integral,
    parse,
    to_string,
)

VERIFY_POINTS = 512

# Real metric from the Hermitian matrix H: g = c * [[Re H, Im H], [-Im H, Re H]]
# in coordinates (x_1..x_n, y_1..y_n).  c = 2 pairs the metric with its Kähler
# form omega = i g_{j kbar} dz^j ^ dzbar^k; c = 1 reads the component form as a
# literal line element (E = F = 1 is then the Euclidean metric).
NORMALIZATIONS = {"kahler": 2.0, "line-element": 1.0}


def normalization_factor(normalization: str) -> float:
    try:
        return NORMALIZATIONS[normalization]
    except KeyError:
        raise ValueError(f"normalization must be one of {sorted(NORMALIZATIONS)}") from None


@dataclass(frozen=True)
class HermitianMetricRadial:
    n: int
    domain: Annulus
    E: RadialFunction
    F: RadialFunction

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("complex dimension n must be an integer >= 2")

    @classmethod
    def from_strings(cls, n: int, domain: Annulus, E: str, F: str) -> "HermitianMetricRadial":
        return cls(n, domain, RadialFunction.parse(E, domain, internal=True),
                   RadialFunction.parse(F, domain, internal=True))

    @classmethod
    def from_exprs(cls, n, domain, E, F) -> "HermitianMetricRadial":
        return cls(n, domain, RadialFunction.of(E, domain), RadialFunction.of(F, domain))

    def restrict(self, domain: Annulus) -> "HermitianMetricRadial":
        return HermitianMetricRadial.from_exprs(self.n, domain, self.E.expr, self.F.expr)

    def scaled(self, factor) -> "HermitianMetricRadial":
        """The metric multiplied by a radial (or constant) factor."""
        w = as_expr(factor)
        return HermitianMetricRadial.from_exprs(self.n, self.domain, w * self.E.expr, w * self.F.expr)

    def check_positive(self, z) -> None:
        e, f = self.E(z), self.F(z)
        if np.any(np.asarray(e) <= 0) or np.any(np.asarray(f) <= 0):
            raise DegenerateMetric("E and F must be positive")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "annulus": self.domain.to_json(),
            "E": to_string(self.E.expr),
            "F": to_string(self.F.expr),
        }

    @classmethod
    def from_json(cls, data) -> "HermitianMetricRadial":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_strings(int(data["n"]), Annulus.from_json(data["annulus"]), data["E"], data["F"])


@dataclass(frozen=True)
class KahlerPotentialDeriv:
    """phi' of a U(n)-invariant Kähler potential phi(z)."""

    n: int
    domain: Annulus
    dphi: RadialFunction

    @classmethod
    def from_string(cls, n: int, domain: Annulus, dphi: str) -> "KahlerPotentialDeriv":
        return cls(n, domain, RadialFunction.parse(dphi, domain, internal=True))

    @classmethod
    def from_potential(cls, n: int, domain: Annulus, phi: str) -> "KahlerPotentialDeriv":
        """Differentiate a potential phi symbolically."""
        return cls(n, domain, RadialFunction(diff(parse(phi)), domain))

    @classmethod
    def of(cls, n, domain, dphi) -> "KahlerPotentialDeriv":
        return cls(n, domain, RadialFunction.of(dphi, domain))

    @cached_property
    def E(self) -> RadialFunction:
        """(z phi')'"""
        return RadialFunction(diff(Z * self.dphi.expr), self.domain)

    def validity_margin(self, points: int = VERIFY_POINTS) -> float:
        """min over the grid of min(phi', (z phi')'); positive iff valid there."""
        zs = self.domain.grid(points)
        return float(min(np.min(self.dphi(zs)), np.min(self.E(zs))))

    def is_valid(self, points: int = VERIFY_POINTS) -> bool:
        try:
            return self.validity_margin(points) > 0
        except DomainError:
            return False


@dataclass(frozen=True)
class ConformalKahlerSplit:
    """m = exp(-logFactor) * (Kähler metric of ``kahler``).

    Equivalently exp(logFactor) E = (z phi')' and exp(logFactor) F = phi'.
    """

    logFactor: RadialFunction
    kahler: KahlerPotentialDeriv

    def residual(self, m: HermitianMetricRadial, points: int = VERIFY_POINTS) -> float:
        zs = m.domain.grid(points)
        w = np.exp(self.logFactor(zs))
        e, f = m.E(zs), m.F(zs)
        r1 = np.abs(w * e - self.kahler.E(zs)) / np.abs(self.kahler.E(zs))
        r2 = np.abs(w * f - self.kahler.dphi(zs)) / np.abs(self.kahler.dphi(zs))
        return float(max(r1.max(), r2.max()))


def metric_from_potential(pot: KahlerPotentialDeriv, verify: bool = True) -> HermitianMetricRadial:
    """E = (z phi')', F = phi'."""
    if verify and not pot.is_valid():
        raise NotKahler("phi' > 0 and (z phi')' > 0 fail on the verification grid")
    return HermitianMetricRadial(pot.n, pot.domain, pot.E, pot.dphi)


def kahler_residual(m: HermitianMetricRadial, z) -> np.ndarray:
    """|E - (zF)'| / (1 + |E|)"""
    zF = RadialFunction(diff(Z * m.F.expr), m.domain)
    e = m.E(z)
    return np.abs(e - zF(z)) / (1 + np.abs(e))


def is_kahler(m: HermitianMetricRadial, points: int = VERIFY_POINTS) -> bool:
    return bool(np.all(kahler_residual(m, m.domain.grid(points)) <= 1e-9))


def split_exprs(m: HermitianMetricRadial, basepoint):
    """Integrands and integrals of the conformal-to-Kähler decomposition.

    Returns (v, log_dphi) with v' = (E - (zF)')/(zF) and
    (log phi')' = (E - F)/(zF), both vanishing at ``basepoint``.
    """
    E, F = m.E.expr, m.F.expr
    zF = Z * F
    v = integral((E - diff(zF)) / zF, basepoint)
    log_dphi = integral((E - F) / zF, basepoint)
    return v, log_dphi


def conformal_to_kahler(m: HermitianMetricRadial, basepoint: float | None = None,
                        verify: bool = True) -> ConformalKahlerSplit:
    """Write m as a conformal multiple of a Kähler metric.

    The representative is normalised so that logFactor vanishes at
    ``basepoint`` (default: the annulus midpoint), where phi' = F.
    """
    b = m.domain.midpoint() if basepoint is None else float(basepoint)
    v, log_dphi = split_exprs(m, b)
    scale = as_expr(m.F(b))
    dphi = scale * exp(log_dphi)
    split = ConformalKahlerSplit(RadialFunction(v, m.domain), KahlerPotentialDeriv.of(m.n, m.domain, dphi))
    if verify:
        if not split.kahler.is_valid():
            raise NotKahler("recovered potential fails the Kähler conditions")
        if split.residual(m) > 1e-8:
            raise NotKahler("conformal decomposition does not reproduce the metric")
    return split


def ambient_hermitian_components(m: HermitianMetricRadial, point) -> np.ndarray:
    """g_{i jbar} = F delta_ij + ((E - F)/z) conj(z_i) z_j at a point of C^n."""
    p = np.asarray(point, dtype=complex)
    if p.shape != (m.n,):
        raise ValueError(f"point must have {m.n} complex coordinates")
    z = float(np.sum(np.abs(p) ** 2))
    if not m.domain.contains(z):
        raise DomainError(f"|p|^2 = {z} outside the annulus")
    e, f = m.E(z), m.F(z)
    return f * np.eye(m.n) + ((e - f) / z) * np.outer(np.conj(p), p)


def real_metric(H: np.ndarray, normalization: str = "kahler") -> np.ndarray:
    """Real 2n x 2n metric for the Hermitian matrix H in (x, y) coordinates."""
    c = normalization_factor(normalization)
    R, S = H.real, H.imag
    return c * np.block([[R, S], [-S, R]])
