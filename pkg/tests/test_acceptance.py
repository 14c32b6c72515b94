"""Acceptance criteria; each test records one PASS/FAIL line for the terminal summary."""

import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES, random_factor, random_potential
from klsc.asymptotics import (
    aligned_constant,
    cone_model,
    log_obstruction,
    magnitude,
    metric_expansion,
    omitted_terms,
    regularity_class,
)
from klsc.construction import AdmissiblePair, build_klsc_metric, klsc_from_potential
from klsc.curvature import chern_conformal, chern_scalar, conformally_scaled, curvature_sweep, riemannian_scalar
from klsc.fd_oracle import riemannian_scalar_fd_oracle
from klsc.geometry import KahlerPotentialDeriv, metric_from_potential
from klsc.radial_expr import Annulus, compile_expr

WHOLE = Annulus(0.0, math.inf)


@contextmanager
def criterion(number: int, title: str):
    notes: list[str] = []
    ok = False
    try:
        yield notes
        ok = True
    finally:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {title}"
        if notes:
            line += " [" + "; ".join(notes) + "]"
        ACCEPTANCE_LINES.append(line)
        print(line)


def _potential(dphi, n=2):
    return KahlerPotentialDeriv.from_string(n, WHOLE, dphi)


def _flat(n):
    return klsc_from_potential(_potential("1", n), basepoint="inf")


def _burns():
    return klsc_from_potential(_potential("1 + 1/z"))


def _fubini_study():
    return klsc_from_potential(_potential("1/(1+z)"), basepoint=1.0, offset=-1.0)


def _pair(F, n=2, C=0):
    return AdmissiblePair.from_strings(n, F, C, WHOLE)


def _worst_defect(con, points=100):
    pieces = con.pieces or (con.metric.domain,)
    return max(s.relative_defect for p in pieces for s in curvature_sweep(con.metric.restrict(p), p.grid(points)))


# ------------------------------------------------------------- 1

def test_criterion_01_kahler_identity():
    with criterion(1, "Kähler identity on 50 random potentials, 64 points, < 10 s") as notes:
        rng = random.Random(1)
        dom = Annulus(0.1, 10.0)
        zs = dom.grid(64)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(50):
            m = metric_from_potential(random_potential(rng, domain=dom))
            worst = max(worst, max(s.relative_defect for s in curvature_sweep(m, zs)))
        elapsed = time.perf_counter() - t0
        notes += [f"max defect {worst:.2e}", f"{elapsed:.2f} s"]
        assert worst <= 1e-8
        assert elapsed < 10


# ------------------------------------------------------------- 2

def test_criterion_02_closed_forms():
    with criterion(2, "conformal factor closed forms and flat-case curvature") as notes:
        zs = WHOLE.grid(64)
        errs = []
        for n in (2, 3, 4):
            want = (n - 1) ** (-2 / (2 * n - 1)) * zs ** (-2 * (n - 1) / (2 * n - 1))
            errs.append(np.max(np.abs(_flat(n).conformalFactorSquared(zs) / want - 1)))
        errs.append(np.max(np.abs(_burns().conformalFactorSquared(zs) / np.log1p(1 / zs) ** (2 / 3) - 1)))
        zf = zs[np.abs(zs - 1.7632) > 1e-3]
        want = np.abs(np.log(zf) - 1 / zf) ** (2 / 3)
        errs.append(np.max(np.abs(_fubini_study().conformalFactorSquared(zf) / want - 1)))
        notes.append(f"max relative v^2 error {max(errs):.2e}")
        assert max(errs) <= 1e-10
        curv = []
        for n in (2, 3):
            r2 = (n - 1) ** (-2 / (2 * n - 1)) * (2 * n - 1) ** 2 * zs ** (1 / (2 * n - 1))
            S = riemannian_scalar(_flat(n).metric, zs, "line-element")
            curv.append(np.max(np.abs(S - 8 * n * (2 * n - 1) * (n - 1) ** 2 / r2) / (1 + np.abs(S))))
        S1 = riemannian_scalar(_flat(2).metric, 1.0, "line-element")
        notes.append(f"S(1) = {S1:.12f}")
        assert max(curv) <= 1e-6
        assert abs(S1 - 16 / 3) <= 1e-6


# ------------------------------------------------------------- 3

def test_criterion_03_klsc_defect():
    with criterion(3, "Klsc defect of constructed metrics, 100 points") as notes:
        cons = {"burns": _burns(), "fubini-study": _fubini_study(),
                "z+z^2": build_klsc_metric(_pair("z+z^2")), "z^2+z^8": build_klsc_metric(_pair("z^2+z^8"))}
        worst = {k: _worst_defect(c) for k, c in cons.items()}
        notes += [f"{k} {v:.1e}" for k, v in worst.items()]
        assert max(worst.values()) <= 1e-6


# ------------------------------------------------------------- 4

def test_criterion_04_oracle_equivalence():
    with criterion(4, "finite-difference oracle vs pipeline, 10 points per metric, < 60 s") as notes:
        t0 = time.perf_counter()
        cons = [_flat(2), _flat(3), _burns(), _fubini_study(),
                build_klsc_metric(_pair("z^2+z^8")), build_klsc_metric(_pair("z+z^2"))]
        worst = 0.0
        for con in cons:
            pieces = con.pieces or (WHOLE,)
            zs = np.concatenate([Annulus(max(p.alpha, 0.05), min(p.beta, 20.0)).grid(10 // len(pieces))
                                 for p in pieces])
            assert len(zs) == 10
            for z in zs:
                S = riemannian_scalar(con.metric, z)
                fd = riemannian_scalar_fd_oracle(con.metric, z)
                worst = max(worst, abs(fd - S) / max(1.0, abs(S)))
        elapsed = time.perf_counter() - t0
        notes += [f"max relative difference {worst:.2e}", f"{elapsed:.1f} s"]
        assert worst <= 1e-3
        assert elapsed < 60


# ------------------------------------------------------------- 5

def test_criterion_05_conformal_law():
    with criterion(5, "Chern conformal law vs direct Chern curvature, 20 random pairs") as notes:
        rng = random.Random(5)
        dom = Annulus(0.1, 10.0)
        zs = dom.grid(32)
        worst = 0.0
        for _ in range(20):
            pot, u = random_potential(rng, domain=dom), random_factor(rng, dom)
            a = chern_conformal(pot, u, zs)
            b = chern_scalar(conformally_scaled(pot, u), zs)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
        notes.append(f"max relative difference {worst:.2e}")
        assert worst <= 1e-8


# ------------------------------------------------------------- 6

def test_criterion_06_fubini_study_split():
    with criterion(6, "Fubini-Study split point and both pieces Klsc") as notes:
        con = _fubini_study()
        notes.append(f"gamma = {con.gamma:.10f}")
        assert abs(con.gamma - 1.763) <= 1e-3
        assert len(con.pieces) == 2
        for p in con.pieces:
            worst = max(s.relative_defect for s in curvature_sweep(con.metric.restrict(p), p.grid(100)))
            notes.append(f"{p.alpha:.4g}..{p.beta:.4g}: {worst:.1e}")
            assert worst <= 1e-6


# ------------------------------------------------------------- 7

def _e_positive(pair):
    prog = compile_expr(pair.E_expr)
    for z in pair.domain.grid(pair.points):
        try:
            if not prog(np.array([z]))[0] > 0:
                return False
        except Exception:
            return False
    return True


def test_criterion_07_admissibility():
    with criterion(7, "admissibility verdicts and agreement with positivity of E") as notes:
        assert _pair("z+z^2").verdict.admissible
        assert _pair("z^2+z^8").verdict.admissible
        rejected = [_pair("1", C=1), AdmissiblePair.from_strings(2, "exp(-z)", 100, WHOLE, 1.0)]
        for pair in rejected:
            v = pair.verdict
            assert not v.admissible and v.violation is not None
            notes.append(f"{pair.F.expr} C={pair.C} rejected at z={v.violation:.6g}")
        pairs = [_pair("z+z^2"), _pair("z^2+z^8"), _pair("1", C=-1), *rejected]
        rng = random.Random(7)
        for _ in range(20):
            F = rng.choice(["1", "z", "exp(-z)", "1+z^2", "1/(1+z)", "2+atan(z)"])
            pairs.append(AdmissiblePair.from_strings(rng.choice([2, 3]), F, Fraction(rng.randint(-9, 9), 2),
                                                     Annulus(0.1, 10.0)))
        agree = sum(p.verdict.admissible == _e_positive(p) for p in pairs)
        notes.append(f"verdict = sign of E on {agree}/{len(pairs)} pairs")
        assert agree == len(pairs)


# ------------------------------------------------------------- 8

def test_criterion_08_regularity_table():
    with criterion(8, "regularity classes, quotient order and exact obstructions") as notes:
        a = regularity_class(_pair("z^2+z^8"))
        b = regularity_class(_pair("z+z^2"))
        c = regularity_class(_pair("1+z"))
        notes += [f"z^2+z^8 {a.smoothnessClass} l={a.quotientOrder}", f"z+z^2 {b.smoothnessClass}",
                  f"1+z {c.smoothnessClass} (obstruction {c.logObstruction})"]
        assert (a.smoothnessClass, a.quotientOrder) == ("C^inf", 3)
        assert b.smoothnessClass == "C^1"
        assert c.k == 0 and c.logObstruction != 0 and c.smoothnessClass == "C^1"
        o1, o2 = log_obstruction(_pair("z^2+z^8").F, 2), log_obstruction(_pair("z+z^2").F, 2)
        assert isinstance(o1, Fraction) and isinstance(o2, Fraction)
        assert (o1, o2) == (0, 2)


# ------------------------------------------------------------- 9

def _poly_mul(a: dict, b: dict, order: int) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j < order:
                out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v != 0}


def _display_series(order: int) -> dict:
    """9z^2 + 9z^8 + 6z^2 sum_{m>=1} (sum_{j>=1} (-1)^j z^(6j)/(2j-1))^m below z^order."""
    inner = {6 * j: Fraction((-1) ** j, 2 * j - 1) for j in range(1, order // 6 + 1)}
    total: dict = {2: Fraction(9), 8: Fraction(9)}
    power = {0: Fraction(1)}
    for _ in range(order // 6 + 1):
        power = _poly_mul(power, inner, order)
        for e, c in power.items():
            if e + 2 < order:
                total[e + 2] = total.get(e + 2, 0) + 6 * c
    return {Fraction(k): v for k, v in total.items() if v != 0}


def test_criterion_09_series_engine():
    with criterion(9, "series expansion of E: exact coefficients and agreement with numerics") as notes:
        pair = _pair("z^2+z^8")
        E, _ = metric_expansion(pair, 15, constant=0)
        assert not E.has_logs
        assert E.plain == _display_series(15)
        notes.append("E = " + " + ".join(f"{c}z^{q}" for q, c in E.plain.items()) + " + O(z^15)")
        for F in ("z^2+z^8", "z+z^2"):
            pair = _pair(F)
            C = aligned_constant(pair)
            series, _ = metric_expansion(pair, None, C)
            omitted, _ = omitted_terms(pair, None, C)
            E_num = build_klsc_metric(pair).metric.E
            for z in (1e-3, 1e-2, 1e-1):
                exact = float(E_num(z))
                err = abs(series(z) - exact)
                bound = 10 * magnitude(omitted, z) + 1e-10 * abs(exact)
                assert err <= bound, (F, z, err, bound)
        notes.append("series within 10x omitted terms at z = 1e-3, 1e-2, 1e-1")


# ------------------------------------------------------------- 10

def test_criterion_10_cone_model():
    with criterion(10, "cone model coefficients and decay exponents") as notes:
        expected = {(2, 0): (Fraction(1, 3), 3), (2, 1): (Fraction(2, 3), 6),
                    (2, 2): (Fraction(1), 9), (3, 0): (Fraction(1, 5), 5)}
        for (n, k), (scale, fiber) in expected.items():
            cm = cone_model(n, k, 1)
            assert cm.coneScale == scale and cm.fiberFactor == fiber
            assert cm.changeOfVariableConstant == Fraction(2 * n - 1, k + 1)
            sub = cm.substitute((2 * n - 1) * (k + 1), 1)
            assert sub == {"dr2": 1, "r2_gCP": scale, "r2_h": scale * fiber}
            assert cm.decay == (Fraction(2, k + 1), Fraction(2 * (k + 2), k + 1), Fraction(2 * (k + 2), k + 1))
            notes.append(f"(n={n},k={k}) scale {scale} fiber {fiber}")
