import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klsc.asymptotics import (
    LogTaylorSeries,
    aligned_constant,
    cone_model,
    leading_order,
    log_obstruction,
    magnitude,
    metric_expansion,
    omitted_terms,
    quotient_check,
    r_exponent,
    regularity_class,
    taylor_series_at_zero,
)
from klsc.asymptotics.expansion import default_order
from klsc.construction import AdmissiblePair, build_klsc_metric
from klsc.errors import AllCoefficientsZero, InexactCoefficient, NotSmoothAtZero
from klsc.radial_expr import Annulus, RadialFunction, parse

WHOLE = Annulus(0.0, math.inf)


def _pair(F, n=2, C=0):
    return AdmissiblePair.from_strings(n, F, C, WHOLE)


# ------------------------------------------------------------- Taylor series

@pytest.mark.parametrize("text, order, want", [
    ("z^2 + z^8", 10, {2: 1, 8: 1}),
    ("z + z^2", 10, {1: 1, 2: 1}),
    ("log(1+z)", 4, {1: 1, 2: Fraction(-1, 2), 3: Fraction(1, 3)}),
    ("exp(z) - 1", 4, {1: 1, 2: Fraction(1, 2), 3: Fraction(1, 6)}),
    ("atan(z)/(1-z)", 4, {1: 1, 2: 1, 3: Fraction(2, 3)}),
])
def test_taylor_examples(text, order, want):
    s = taylor_series_at_zero(RadialFunction.parse(text, WHOLE), order)
    assert s.plain == {Fraction(q): Fraction(c) for q, c in want.items()}
    assert s.logPart == {} and s.order == order


@pytest.mark.parametrize("text", ["log(z)", "1/z", "z^(1/2)", "z*log(z)"])
def test_taylor_rejects_non_smooth(text):
    with pytest.raises(NotSmoothAtZero):
        taylor_series_at_zero(parse(text), 4)


def test_taylor_rejects_irrational_coefficients():
    with pytest.raises(InexactCoefficient):
        taylor_series_at_zero(parse("exp(1+z)"), 4)
    with pytest.raises(InexactCoefficient):
        taylor_series_at_zero(parse("pi*z"), 4)


@pytest.mark.parametrize("text, k", [("z^2+z^8", 2), ("z+z^2", 1), ("1+z", 0), ("z^3*exp(z)", 3),
                                     ("exp(z)-1-z", 2)])
def test_leading_order_examples(text, k):
    assert leading_order(parse(text)) == k


def test_leading_order_all_zero():
    with pytest.raises(AllCoefficientsZero):
        leading_order(parse("z - z"))


# ------------------------------------------------------------- ring laws

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)
exps = st.fractions(min_value=-2, max_value=4, max_denominator=3)
series = st.builds(
    lambda d: LogTaylorSeries(d, 6),
    st.dictionaries(st.tuples(exps, st.integers(0, 2)), coeffs, max_size=5),
)


@settings(max_examples=150, derandomize=True, deadline=None)
@given(series, series, series)
def test_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == LogTaylorSeries({}, 6)


@settings(max_examples=100, derandomize=True, deadline=None)
@given(series)
def test_antiderivative_inverts_derivative(s):
    assert s.antiderivative().derivative().truncate(6) == s.truncate(6)


@settings(max_examples=100, derandomize=True, deadline=None)
@given(st.dictionaries(st.integers(1, 5), coeffs, max_size=4), st.fractions(1, 5, max_denominator=4))
def test_reciprocal_of_unit_series(tail, lead):
    s = LogTaylorSeries.from_plain({0: lead, **tail}, 8)
    assert s * s.reciprocal() == LogTaylorSeries.constant(1, 8)


def test_antiderivative_log_rule():
    # 1/(z^n F^(n-1)) for F = z + z^2, n = 2 is z^-3 (1 - z + z^2 - ...)
    F = taylor_series_at_zero(parse("z + z^2"), 12)
    integrand = F.reciprocal().shift(-2)
    B = integrand.coefficient(-1)
    assert B == 1
    I = integrand.antiderivative()
    assert I.coefficient(0, 1) == B
    assert I.logPart == {Fraction(0): B}
    assert LogTaylorSeries.monomial(3, -1, 1, 4).antiderivative().coefficient(0, 2) == Fraction(3, 2)


def test_series_dump_and_load():
    s = LogTaylorSeries({(Fraction(1, 3), 0): Fraction(-2, 5), (0, 2): 7, (2, 1): Fraction(1, 2)}, 5)
    rows = s.dump()
    assert rows == [[0, 1, 7, 1, 2], [1, 3, -2, 5, 0], [2, 1, 1, 2, 1]]
    assert LogTaylorSeries.load(json.loads(json.dumps(rows)), 5) == s


# ------------------------------------------------------------- metric expansion

@pytest.mark.parametrize("F, n, k, E_lead", [("z^2+z^8", 2, 2, 9), ("z+z^2", 2, 1, 6), ("1+z", 2, 0, 3),
                                             ("2+z", 3, 0, 10), ("z^2+z^3", 3, 2, 15)])
def test_metric_expansion_leading_terms(F, n, k, E_lead):
    pair = _pair(F, n)
    E, zF = metric_expansion(pair)
    c = taylor_series_at_zero(pair.F, k + 1).coefficient(k)
    assert E.leading() == (k, 0, E_lead)
    assert E_lead == (2 * n - 1) * (k + 1) * c
    assert zF.leading() == (k + 1, 0, c)
    assert E.order == default_order(n, k)


def test_metric_expansion_z2_z8_display():
    E, _ = metric_expansion(_pair("z^2+z^8"), 20, constant=0)
    want = {Fraction(2): 9, Fraction(8): 3, Fraction(14): 8}
    assert {q: c for q, c in E.plain.items() if q < 20} == want
    assert not E.has_logs


def test_metric_expansion_z_z2_closed_form_coefficients():
    # 2z + 3z^2 + 4z/(1 - 2z + 2z^2 log(1 + 1/z)) = 6z + 11z^2 + 8z^3 log z + ...
    E, _ = metric_expansion(_pair("z+z^2"), 4, constant=0)
    assert E.terms == {(1, 0): 6, (2, 0): 11, (3, 0): 16, (3, 1): 8}
    assert abs(aligned_constant(_pair("z+z^2"))) < 1e-9


@pytest.mark.parametrize("F", ["z+z^2", "z^2+z^8"])
def test_series_agrees_with_numerics(F):
    pair = _pair(F)
    C = aligned_constant(pair)
    E, zF = metric_expansion(pair, None, C)
    omitted_E, _ = omitted_terms(pair, None, C)
    metric = build_klsc_metric(pair).metric
    for z in (1e-3, 1e-2, 1e-1):
        exact = float(metric.E(z))
        bound = 10 * magnitude(omitted_E, z) + 1e-10 * abs(exact)
        assert abs(E(z) - exact) <= bound
        assert abs(zF(z) - z * float(metric.F(z))) <= 1e-14 * z


# ------------------------------------------------------------- cone model

@pytest.mark.parametrize("n, k, scale, fiber, K", [
    (2, 0, Fraction(1, 3), 3, 3), (2, 1, Fraction(2, 3), 6, Fraction(3, 2)),
    (2, 2, 1, 9, 1), (3, 0, Fraction(1, 5), 5, 5),
])
def test_cone_model_examples(n, k, scale, fiber, K):
    cm = cone_model(n, k, 1)
    assert (cm.coneScale, cm.fiberFactor, cm.changeOfVariableConstant) == (scale, fiber, K)
    assert cm.decay == (Fraction(2, k + 1), Fraction(2 * (k + 2), k + 1), Fraction(2 * (k + 2), k + 1))
    # leading terms (2n-1)(k+1) c z^k and c z^(k+1) become dr^2 + s r^2 (g_CP + f h)
    sub = cm.substitute((2 * n - 1) * (k + 1), 1)
    assert sub == {"dr2": 1, "r2_gCP": scale, "r2_h": scale * fiber}


@settings(max_examples=60, derandomize=True, deadline=None)
@given(st.integers(2, 6), st.integers(0, 6), st.fractions(Fraction(1, 7), 7, max_denominator=9))
def test_cone_substitution_identity(n, k, c):
    cm = cone_model(n, k, c)
    sub = cm.substitute((2 * n - 1) * (k + 1) * c, c)
    assert sub["dr2"] == 1
    assert sub["r2_gCP"] == cm.coneScale
    assert sub["r2_h"] == cm.coneScale * cm.fiberFactor


def test_cone_model_rejects_non_positive_coefficient():
    with pytest.raises(ValueError):
        cone_model(2, 0, 0)


def test_r_exponent():
    assert r_exponent(3, 2) == 2
    assert r_exponent(1, 2) == Fraction(2, 3)


# ------------------------------------------------------------- obstruction and regularity

@pytest.mark.parametrize("F, n, want", [("z^2+z^8", 2, 0), ("z+z^2", 2, 2), ("1", 2, 0), ("1+z", 2, -1),
                                        ("z^2+z^3", 2, -6), ("z^2+z^8", 3, -1440), ("1+z", 3, 6)])
def test_log_obstruction_examples(F, n, want):
    val = log_obstruction(parse(F), n)
    assert isinstance(val, Fraction) and val == want


@pytest.mark.parametrize("F, n", [("1+z", 2), ("1+z^2", 2), ("z+z^2", 2), ("z+z^3", 2), ("z^2+z^8", 2),
                                  ("z^2+z^3", 2), ("1+z", 3), ("1+z^3", 3), ("2+z^2", 3), ("z+z^5", 3)])
def test_obstruction_vanishes_iff_no_log_terms(F, n):
    pair = _pair(F, n)
    E, zF = metric_expansion(pair)
    assert (log_obstruction(pair.F, n) == 0) == (not E.has_logs)
    assert not zF.has_logs


@pytest.mark.parametrize("F, n, cls, ell, obstruction", [
    ("z^2+z^8", 2, "C^inf", 3, 0), ("z+z^2", 2, "C^1", None, 2), ("1+z", 2, "C^1", None, -1),
    ("1+z^2", 2, "C^inf", None, 0), ("z^3+z^9", 2, "C^inf", None, 0), ("z^2+z^3", 2, "C^0", 3, -6),
    ("1+z", 3, "C^3", None, 6), ("z^2+z^8", 3, "C^3", None, -1440),
])
def test_regularity_table(F, n, cls, ell, obstruction):
    rep = regularity_class(_pair(F, n))
    assert rep.smoothnessClass == cls
    assert rep.quotientOrder == ell
    assert rep.logObstruction == obstruction
    assert rep.fiberFactor == (rep.k + 1) * (2 * n - 1)


def test_regularity_reports_fractional_eta():
    rep = regularity_class(_pair("z^2+z^3"))
    assert rep.eta == Fraction(2, 3) and rep.etaCertified


def test_regularity_for_non_polynomial_is_truncation_conditional():
    rep = regularity_class(_pair("z^2*exp(z^6)"))
    assert rep.smoothnessClass == "C^inf"
    assert not rep.etaCertified and rep.etaBound is not None
    assert rep.notes


def test_regularity_json():
    rep = regularity_class(_pair("z^2+z^8"))
    data = json.loads(rep.dumps())
    assert data["smoothnessClass"] == "C^inf" and data["quotientOrder"] == 3
    assert data["eta"] == "inf" and data["coneScale"] == 1 and data["fiberFactor"] == 9
    assert data["nonsingularQuotient"] is True
    data = regularity_class(_pair("z+z^2")).to_json()
    assert data["coneScale"] == "2/3" and data["logObstruction"] == 2


@pytest.mark.parametrize("n, k, want", [(2, 2, (3, True)), (2, 0, (None, False)), (5, 0, (3, False)),
                                        (3, 4, (5, True)), (2, 11, (6, False))])
def test_quotient_check(n, k, want):
    assert quotient_check(n, k) == want
