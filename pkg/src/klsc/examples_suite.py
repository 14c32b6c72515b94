"""The worked examples: flat space, Burns, Fubini-Study and the pairs z^2+z^8, z+z^2.

Each example rebuilds its metric with the library and compares the result
against independently written closed forms.  Failures are recorded as
report entries, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .asymptotics import metric_expansion, regularity_class
from .asymptotics.series import LogTaylorSeries
from .construction import AdmissiblePair, build_klsc_metric, klsc_from_potential
from .curvature import CurvatureSample, curvature_sweep, riemannian_scalar
from .geometry import KahlerPotentialDeriv
from .radial_expr import Annulus

CLOSED_FORM_TOL = 1e-10
CURVATURE_TOL = 1e-8
DEFECT_TOL = 1e-6
CLOSED_FORM_POINTS = 64
SWEEP_POINTS = 100
WHOLE = Annulus(0.0, math.inf)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float | str
    expected: float | str
    tolerance: float | None = None

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "expected": self.expected, "tolerance": self.tolerance}


@dataclass
class ExampleResult:
    name: str
    checks: list = field(default_factory=list)
    sweeps: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "example": self.name,
            "passed": self.passed,
            "data": self.data,
            "checks": [c.to_json() for c in self.checks],
            "sweeps": {k: [{"z": s.z, "S": s.S, "S_C": s.S_C, "defect": s.defect} for s in v]
                       for k, v in self.sweeps.items()},
        }

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"{tag} {self.name}: {c.name} (value {c.value}, expected {c.expected})")
        return out

    # helpers used by the example builders
    def relative(self, name: str, got, want, tol: float):
        got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
        err = float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300)))
        self.checks.append(Check(name, bool(err <= tol), err, 0.0, tol))

    def absolute(self, name: str, got: float, want: float, tol: float):
        self.checks.append(Check(name, bool(abs(got - want) <= tol), float(got), float(want), tol))

    def equal(self, name: str, got, want):
        self.checks.append(Check(name, got == want, str(got), str(want)))

    def sweep(self, label: str, samples: list[CurvatureSample]):
        self.sweeps[label] = samples
        worst = max(s.relative_defect for s in samples)
        self.checks.append(Check(f"relative defect |S-2S_C|/(1+|S|) on {label}",
                                 bool(worst <= DEFECT_TOL), worst, 0.0, DEFECT_TOL))


def _atan_minus_identity(x: np.ndarray) -> np.ndarray:
    """atan(x) - x without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.1
    xs = np.where(small, x, 0.0)
    series = sum((-1) ** j * xs ** (2 * j + 1) / (2 * j + 1) for j in range(1, 13))
    return np.where(small, series, np.arctan(x) - x)


def _interior(domain: Annulus, points: int) -> np.ndarray:
    return domain.grid(points)


def flat(n: int) -> ExampleResult:
    res = ExampleResult(f"flat-{n}")
    pot = KahlerPotentialDeriv.from_string(n, WHOLE, "1")
    con = klsc_from_potential(pot, basepoint="inf")
    zs = _interior(WHOLE, CLOSED_FORM_POINTS)
    want = (n - 1) ** (-2 / (2 * n - 1)) * zs ** (-2 * (n - 1) / (2 * n - 1))
    res.relative("v^2 closed form", con.conformalFactorSquared(zs), want, CLOSED_FORM_TOL)
    r2 = (n - 1) ** (-2 / (2 * n - 1)) * (2 * n - 1) ** 2 * zs ** (1 / (2 * n - 1))
    S = riemannian_scalar(con.metric, zs, "line-element")
    res.relative("S = 8n(2n-1)(n-1)^2 r^-2 (line element)", S, 8 * n * (2 * n - 1) * (n - 1) ** 2 / r2,
                 DEFECT_TOL)
    if n == 2:
        res.absolute("S at z=1 (line element)", riemannian_scalar(con.metric, 1.0, "line-element"),
                     16 / 3, DEFECT_TOL)
    res.sweep("(0, inf)", curvature_sweep(con.metric, _interior(WHOLE, SWEEP_POINTS)))
    return res


def burns() -> ExampleResult:
    res = ExampleResult("burns")
    pot = KahlerPotentialDeriv.from_string(2, WHOLE, "1 + 1/z")
    con = klsc_from_potential(pot, basepoint="inf")
    zs = _interior(WHOLE, CLOSED_FORM_POINTS)
    L = np.log1p(1 / zs)
    res.relative("v^2 closed form", con.conformalFactorSquared(zs), L ** (2 / 3), CLOSED_FORM_TOL)
    S_closed = (8 / 3) / (zs * (zs + 1) ** 2 * L ** (8 / 3))
    res.relative("S closed form", riemannian_scalar(con.metric, zs), S_closed, CURVATURE_TOL)
    res.absolute("S at z=1", riemannian_scalar(con.metric, 1.0), (2 / 3) * math.log(2) ** (-8 / 3),
                 CURVATURE_TOL)
    res.sweep("(0, inf)", curvature_sweep(con.metric, _interior(WHOLE, SWEEP_POINTS)))
    return res


def fubini_study() -> ExampleResult:
    res = ExampleResult("fubini-study")
    pot = KahlerPotentialDeriv.from_string(2, WHOLE, "1/(1+z)")
    con = klsc_from_potential(pot, basepoint=1.0, offset=-1.0)
    zs = _interior(WHOLE, CLOSED_FORM_POINTS)
    zs = zs[np.abs(zs - 1.763) > 1e-3]
    Q = np.log(zs) - 1 / zs
    res.relative("v^2 closed form", con.conformalFactorSquared(zs), np.abs(Q) ** (2 / 3), CLOSED_FORM_TOL)
    gamma = con.gamma if con.gamma is not None else float("nan")
    res.data["gamma"] = gamma
    res.absolute("gamma", gamma, 1.763, 1e-3)
    for piece in con.pieces:
        m = con.metric.restrict(piece)
        zz = _interior(piece, CLOSED_FORM_POINTS)
        q = np.log(zz) - 1 / zz
        S_closed = np.abs(q) ** (-2 / 3) * ((8 / 3) * (zz + 1) * (1 + 1 / zz) ** 3 / q ** 2 + 12)
        res.relative(f"S closed form on {piece}", riemannian_scalar(m, zz), S_closed, CURVATURE_TOL)
        res.sweep(str(piece), curvature_sweep(m, _interior(piece, SWEEP_POINTS)))
    return res


def _series_display_z2_z8(order: int) -> LogTaylorSeries:
    """9z^2 + 9z^8 + 6z^2 sum_m (sum_j (-1)^j z^(6j)/(2j-1))^m, truncated."""
    inner = LogTaylorSeries({(6 * j, 0): Fraction((-1) ** j, 2 * j - 1) for j in range(1, order // 6 + 1)},
                            order)
    geom = LogTaylorSeries({}, order)
    power = LogTaylorSeries.constant(1)
    for _ in range(order // 6 + 1):
        power = power * inner
        geom = geom + power
    return LogTaylorSeries.from_plain({2: 9, 8: 9}) + geom.shift(2).scale(6).truncate(order)


def z2_z8() -> ExampleResult:
    res = ExampleResult("z2-z8")
    pair = AdmissiblePair.from_strings(2, "z^2+z^8", 0, WHOLE)
    verdict = pair.verdict
    res.equal("admissible", verdict.admissible, True)
    con = build_klsc_metric(pair)
    zs = _interior(WHOLE, CLOSED_FORM_POINTS)
    A = _atan_minus_identity(zs ** -3.0)
    res.relative("E closed form", con.metric.E(zs), 3 * zs ** 2 + 9 * zs ** 8 - 6 / (zs * A), CURVATURE_TOL)
    res.relative("recovered phi' closed form", con.recoveredPotential.dphi(zs),
                 81 * (zs ** 2 + zs ** 8) / A ** 2, CURVATURE_TOL)
    res.sweep("(0, inf)", curvature_sweep(con.metric, _interior(WHOLE, SWEEP_POINTS)))
    E, _ = metric_expansion(pair, 20, constant=0)
    res.equal("E-series through z^14", E.truncate(15), _series_display_z2_z8(20).truncate(15))
    rep = regularity_class(pair)
    res.data["regularity"] = rep.to_json()
    res.equal("log obstruction", rep.logObstruction, 0)
    res.equal("smoothness class", rep.smoothnessClass, "C^inf")
    res.equal("quotient order", rep.quotientOrder, 3)
    res.equal("nonsingular quotient", rep.nonsingularQuotient, True)
    return res


def z_z2() -> ExampleResult:
    res = ExampleResult("z-z2")
    pair = AdmissiblePair.from_strings(2, "z+z^2", 0, WHOLE)
    res.equal("admissible", pair.verdict.admissible, True)
    con = build_klsc_metric(pair)
    zs = _interior(WHOLE, CLOSED_FORM_POINTS)
    E_closed = 2 * zs + 3 * zs ** 2 + 4 * zs / (1 - 2 * zs + 2 * zs ** 2 * np.log1p(1 / zs))
    res.relative("E closed form", con.metric.E(zs), E_closed, CURVATURE_TOL)
    res.data["E(1)"] = float(con.metric.E(1.0))
    res.sweep("(0, inf)", curvature_sweep(con.metric, _interior(WHOLE, SWEEP_POINTS)))
    rep = regularity_class(pair)
    res.data["regularity"] = rep.to_json()
    res.equal("log obstruction", rep.logObstruction, 2)
    res.equal("smoothness class", rep.smoothnessClass, "C^1")
    res.equal("quotient order", rep.quotientOrder, None)
    return res


EXAMPLES = {
    "flat-2": lambda: flat(2),
    "flat-3": lambda: flat(3),
    "burns": burns,
    "fubini-study": fubini_study,
    "z2-z8": z2_z8,
    "z-z2": z_z2,
}


def run_example(name: str) -> ExampleResult:
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    except Exception as exc:  # failures become report entries
        res = ExampleResult(name)
        res.checks.append(Check("completed", False, f"{type(exc).__name__}: {exc}", "no error"))
        return res


def examples_suite(which=None) -> list[ExampleResult]:
    names = list(EXAMPLES) if which in (None, "all") else [which]
    return [run_example(n) for n in names]
