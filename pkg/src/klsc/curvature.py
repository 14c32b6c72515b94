"""Scalar curvatures of U(n)-invariant Hermitian metrics.

Two independent routes are provided for the Riemannian scalar curvature:

* ``riemannian_scalar`` writes the metric as a conformal multiple of a
  Kähler metric, uses S = 2 S_C for the Kähler metric and applies the
  conformal transformation law;
* ``riemannian_scalar_fd_oracle`` (in :mod:`klsc.fd_oracle`) differentiates
  the full real metric tensor numerically.

The Chern scalar curvature uses the closed radial formula

    S_C = -[(z L')'/E + (n-1) L'/F],   L = log(E F^(n-1)).

Values are reported for the ``"kahler"`` normalisation by default; the
``"line-element"`` normalisation halves the metric and so doubles every
scalar curvature.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import NonPositiveConformalFactor
from .geometry import (
    HermitianMetricRadial,
    KahlerPotentialDeriv,
    normalization_factor,
)
from .radial_expr import (
    LOCAL,
    Z,
    Expr,
    RadialFunction,
    compile_expr,
    diff,
    exp,
    integral,
    log,
    power,
)


def _scale(normalization: str) -> float:
    return 2.0 / normalization_factor(normalization)


def _as_array(z):
    return np.asarray(z, dtype=float)


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# ------------------------------------------------------------- expressions

def chern_scalar_expr(n: int, E: Expr, F: Expr) -> Expr:
    L = log(E) + (n - 1) * log(F)
    L1 = diff(L)
    return -(diff(Z * L1) / E + (n - 1) * L1 / F)


def kahler_laplacian_expr(n: int, dphi: Expr, u: Expr) -> Expr:
    du = diff(u)
    return 2 * (diff(Z * du) / diff(Z * dphi) + (n - 1) * du / dphi)


def riemannian_conformal_expr(n: int, S_base: Expr, dphi: Expr, u: Expr) -> Expr:
    lap = kahler_laplacian_expr(n, dphi, u)
    q = Fraction(1, n - 1)
    return (-2 * Fraction(2 * n - 1, n - 1)) * power(u, -(n + 1) * q) * lap + S_base * power(u, -2 * q)


def chern_conformal_expr(n: int, dphi: Expr, u: Expr) -> Expr:
    y = diff(u) / u
    zdphi_d = diff(Z * dphi)
    S_base = chern_scalar_expr(n, zdphi_d, dphi)
    w = power(u, Fraction(-2, n - 1))
    bracket = diff(Z * y) * dphi + (n - 1) * y * zdphi_d
    return (-Fraction(2 * n, n - 1)) * w / (dphi * zdphi_d) * bracket + w * S_base


def pointwise_split(n: int, E: Expr, F: Expr) -> tuple[Expr, Expr]:
    """(phi', w) with m = w * (Kähler metric of phi'), normalised at each evaluation point.

    phi' = exp(J) and w = F exp(-J), where J' = (E - F)/(zF) and J vanishes
    at the point of evaluation.  Curvatures do not depend on that choice of
    normalisation, which removes every quadrature from the pipeline.
    """
    J = integral((E - F) / (Z * F), LOCAL)
    return exp(J), F * exp(-J)


def riemannian_scalar_expr(n: int, E: Expr, F: Expr) -> Expr:
    dphi, w = pointwise_split(n, E, F)
    u = power(w, Fraction(n - 1, 2))
    S_kahler = 2 * chern_scalar_expr(n, diff(Z * dphi), dphi)
    return riemannian_conformal_expr(n, S_kahler, dphi, u)


@lru_cache(maxsize=512)
def _program(kind: str, n: int, *exprs: Expr):
    builders = {
        "chern": chern_scalar_expr,
        "riemann": riemannian_scalar_expr,
        "laplacian": kahler_laplacian_expr,
        "chern_conformal": chern_conformal_expr,
    }
    return compile_expr(builders[kind](n, *exprs))


# ------------------------------------------------------------- operations

def chern_scalar(m: HermitianMetricRadial, z, normalization: str = "kahler"):
    zz = _as_array(z)
    m.domain.check(zz)
    m.check_positive(zz)
    return _out(_scale(normalization) * _program("chern", m.n, m.E.expr, m.F.expr)(zz))


def kahler_laplacian(pot: KahlerPotentialDeriv, u: RadialFunction, z):
    """Laplacian of a radial function u for the Kähler metric of phi'."""
    zz = _as_array(z)
    pot.domain.check(zz)
    return _out(_program("laplacian", pot.n, pot.dphi.expr, u.expr)(zz))


def riemannian_conformal(S_base, pot: KahlerPotentialDeriv, u: RadialFunction, z):
    """Scalar curvature of u^(2/(n-1)) g, given the scalar curvature S_base of the Kähler metric g."""
    zz = _as_array(z)
    pot.domain.check(zz)
    n = pot.n
    uz = u.values(zz)
    if np.any(uz <= 0):
        raise NonPositiveConformalFactor("conformal factor u must be positive")
    lap = kahler_laplacian(pot, u, zz)
    val = -2 * (2 * n - 1) / (n - 1) * uz ** (-(n + 1) / (n - 1)) * lap
    val = val + np.asarray(S_base, dtype=float) * uz ** (-2 / (n - 1))
    return _out(val)


def chern_conformal(pot: KahlerPotentialDeriv, u: RadialFunction, z):
    """Chern scalar curvature of u^(2/(n-1)) g for the Kähler metric g of phi'."""
    zz = _as_array(z)
    pot.domain.check(zz)
    if np.any(u.values(zz) <= 0):
        raise NonPositiveConformalFactor("conformal factor u must be positive")
    return _out(_program("chern_conformal", pot.n, pot.dphi.expr, u.expr)(zz))


def riemannian_scalar(m: HermitianMetricRadial, z, normalization: str = "kahler"):
    """Riemannian scalar curvature through the conformal-to-Kähler decomposition."""
    zz = _as_array(z)
    m.domain.check(zz)
    m.check_positive(zz)
    return _out(_scale(normalization) * _program("riemann", m.n, m.E.expr, m.F.expr)(zz))


@dataclass(frozen=True)
class CurvatureSample:
    z: float
    S: float
    S_C: float

    @property
    def defect(self) -> float:
        return self.S - 2 * self.S_C

    @property
    def relative_defect(self) -> float:
        return abs(self.defect) / (1 + abs(self.S))


def klsc_defect(m: HermitianMetricRadial, z, normalization: str = "kahler"):
    """CurvatureSample at a scalar z, or a list of them for an array."""
    zz = _as_array(z)
    S = np.atleast_1d(riemannian_scalar(m, zz, normalization))
    SC = np.atleast_1d(chern_scalar(m, zz, normalization))
    samples = [CurvatureSample(float(a), float(b), float(c))
               for a, b, c in zip(np.atleast_1d(zz), S, SC)]
    return samples[0] if zz.ndim == 0 else samples


def curvature_sweep(m: HermitianMetricRadial, zs, normalization: str = "kahler") -> list[CurvatureSample]:
    return klsc_defect(m, np.asarray(zs, dtype=float).ravel(), normalization)


def sweep_to_csv(samples: list[CurvatureSample]) -> str:
    """CSV text with header z,S,S_C,defect and 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z", "S", "S_C", "defect"])
    for s in samples:
        w.writerow([f"{v:.17g}" for v in (s.z, s.S, s.S_C, s.defect)])
    return buf.getvalue()


def conformally_scaled(pot: KahlerPotentialDeriv, u: RadialFunction) -> HermitianMetricRadial:
    """The metric u^(2/(n-1)) g_phi in component form."""
    w = power(u.expr, Fraction(2, pot.n - 1))
    E = w * diff(Z * pot.dphi.expr)
    return HermitianMetricRadial.from_exprs(pot.n, pot.domain, E, w * pot.dphi.expr)


__all__ = [
    "CurvatureSample", "chern_scalar", "kahler_laplacian", "riemannian_conformal",
    "chern_conformal", "riemannian_scalar", "klsc_defect", "curvature_sweep",
    "sweep_to_csv", "conformally_scaled",
]
