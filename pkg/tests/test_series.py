import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripdecay import expr as ex
from stripdecay.corpus import RATIONAL_L1, random_exact_rational
from stripdecay.gaussian import GaussianRational as G
from stripdecay.series import (
    Boundary,
    Coords,
    Expansion,
    OscSum,
    OscTerm,
    PoleAtPoint,
    Term,
    differentiate,
    expand_at,
    expand_expr,
    leading_data,
    multiply,
    noncompensation_witness,
)

ZP = Boundary.zero_plus()
INF = Boundary.infinity()


def coeffs_by_exp(e: Expansion) -> dict:
    return {(complex(t.r), t.s): complex(t.coeff) for t in e.terms}


def rat(text):
    return ex.to_rational(ex.parse(text))


# --- expand_at -------------------------------------------------------------

def test_expand_at_infinity_example():
    e = expand_at(rat("1/(1+t^2)"), INF, 4)
    got = [(t.re_r, complex(t.coeff)) for t in e.terms]
    assert got == [(-2, 1), (-4, -1), (-6, 1), (-8, -1)]
    assert leading_data(e).le1 == -2


def test_expand_at_zero_example():
    e = expand_at(rat("1/(1+t^2)"), ZP, 5)
    assert [(t.re_r, complex(t.coeff)) for t in e.terms][:3] == [(0, 1), (2, -1), (4, 1)]
    assert leading_data(e).le1 == 0


def test_expand_double_pole_at_infinity():
    e = expand_at(rat("1/(t-i)^2"), INF, 4)
    got = [complex(t.coeff) for t in e.terms]
    # coefficient of t^-j is (j-1) i^(j-2)
    assert got == [1, 2j, -3, -4j]
    assert [t.re_r for t in e.terms] == [-2, -3, -4, -5]


def test_pole_at_finite_point_reports_order():
    with pytest.raises(PoleAtPoint) as info:
        expand_at(rat("1/(t-1)^3"), Boundary.finite(1), 4)
    assert info.value.order == 3


def test_partial_sums_converge():
    f = rat("1/(1+t^2)")
    e = expand_at(f, INF, 5)
    t = 10.0
    assert abs(e.evaluate_t(t) - 1 / (1 + t * t)) <= 2 * t ** -12


def test_standard_coordinates_at_infinity():
    e = expand_at(rat("1/(1+t^2)"), Boundary.infinity(coords=Coords.STANDARD), 3)
    assert [t.re_r for t in e.terms] == [2, 4, 6]
    assert abs(e.evaluate_t(7.0) - 1 / 50) < 1e-5


def test_finite_point_taylor():
    e = expand_at(rat("1/(1+t^2)"), Boundary.finite(1), 3)
    # f(1+y) = 1/2 - y/2 + y^2/4 + ...
    assert [complex(t.coeff) for t in e.terms] == [0.5, -0.5, 0.25]


# --- leading data ------------------------------------------------------------

def test_leading_data_examples():
    e = Expansion(ZP, (Term(3, -2, 0), Term(5, -1, 1)))
    ld = leading_data(e)
    assert (ld.le1, ld.le2) == (-2, 0)
    assert [complex(c) for c, _ in ld.lc] == [3]

    e = Expansion(ZP, (Term(1, -1, 1), Term(7, -1, 0)))
    assert (leading_data(e).le1, leading_data(e).le2) == (-1, 1)

    e = Expansion(ZP, (Term(2, 1j, 0), Term(3, -1j, 0)))
    ld = leading_data(e)
    assert (ld.le1, ld.le2) == (0, 0)
    assert sorted((complex(c).real, g) for c, g in ld.lc) == [(2, 1.0), (3, -1.0)]


def test_leading_data_of_zero_raises():
    with pytest.raises(ValueError):
        leading_data(Expansion(ZP, ()))


# --- differentiate ------------------------------------------------------------

def test_differentiate_examples():
    d = differentiate(Expansion(ZP, (Term(1, -1, 1),)))
    assert coeffs_by_exp(d) == {(-2, 1): -1, (-2, 0): 1}
    assert (leading_data(d).le1, leading_data(d).le2) == (-2, 1)
    assert differentiate(Expansion(ZP, (Term(1, 0, 0),))).is_zero()
    d = differentiate(Expansion(ZP, (Term(1, 2), Term(-1, 4)), 4))
    assert coeffs_by_exp(d) == {(1, 0): 2, (3, 0): -4}


@pytest.mark.parametrize("text", RATIONAL_L1 + ("1/(1+t)^3", "(t^3+2)/(t^2+t+5)"))
@pytest.mark.parametrize("b", [ZP, INF, Boundary.infinity(side=-1)], ids=["0+", "+inf", "-inf"])
def test_differentiate_commutes_with_expansion(text, b):
    f = rat(text)
    n = 8
    lhs = differentiate(expand_at(f, b, n))
    rhs = expand_at(f.derivative(), b, n)
    if b.kind.name == "INFINITY" and b.side == -1:
        # affine y = -t, so d/dy = -d/dt
        rhs = rhs.scale(G(-1))
    valid = b.direction * min(b.direction * lhs.order_valid_to, b.direction * rhs.order_valid_to)
    assert coeffs_by_exp(lhs.truncate(valid)) == coeffs_by_exp(rhs.truncate(valid))


# --- multiply -----------------------------------------------------------------

def test_multiply_examples():
    a = Expansion(ZP, (Term(1, 0), Term(-1, 2)), 4)
    b = Expansion(ZP, (Term(1, 0), Term(1, 2)), 4)
    assert coeffs_by_exp(multiply(a, b)) == {(0, 0): 1, (4, 0): -1}

    a = Expansion(ZP, (Term(1, -1),))
    b = Expansion(ZP, (Term(1, -1, 1),))
    assert coeffs_by_exp(multiply(a, b)) == {(-2, 1): 1}

    a = Expansion(INF, (Term(1, 0), Term(1, -1)), -6)
    b = Expansion(INF, (Term(1, 0), Term(-1, -1)), -6)
    assert coeffs_by_exp(multiply(a, b)) == {(0, 0): 1, (-2, 0): -1}


def test_multiply_rejects_mixed_boundaries():
    with pytest.raises(ValueError):
        multiply(Expansion(ZP, (Term(1, 0),)), Expansion(INF, (Term(1, 0),)))


_exact_term = st.builds(
    Term,
    st.builds(G, st.fractions(min_value=-4, max_value=4, max_denominator=5),
              st.fractions(min_value=-4, max_value=4, max_denominator=5)),
    st.integers(min_value=-3, max_value=6).map(Fraction),
    st.integers(min_value=0, max_value=2),
)
_expansion = st.builds(
    lambda terms, v: Expansion(ZP, tuple(terms), v),
    st.lists(_exact_term, max_size=5),
    st.integers(min_value=3, max_value=8).map(float),
)


@settings(max_examples=80, deadline=None)
@given(_expansion, _expansion)
def test_multiply_commutative(a, b):
    assert coeffs_by_exp(a * b) == coeffs_by_exp(b * a)
    assert (a * b).order_valid_to == (b * a).order_valid_to


@settings(max_examples=60, deadline=None)
@given(_expansion, _expansion, _expansion)
def test_multiply_associative(a, b, c):
    left, right = (a * b) * c, a * (b * c)
    v = min(left.order_valid_to, right.order_valid_to)
    assert coeffs_by_exp(left.truncate(v)) == coeffs_by_exp(right.truncate(v))


@settings(max_examples=60, deadline=None)
@given(_expansion)
def test_terms_strictly_ordered(e):
    keys = [(e.direction * t.re_r, -t.s, t.im_r) for t in e.terms]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys)
    assert all(complex(t.coeff) != 0 for t in e.terms)


def test_dominance_at_infinity_prefers_larger_exponents():
    e = Expansion(INF, (Term(1, -3), Term(1, -1), Term(1, -1, 2)))
    assert [(t.re_r, t.s) for t in e.terms] == [(-1, 2), (-1, 0), (-3, 0)]


def test_expansion_json_layout():
    d = expand_at(rat("1/(1+t^2)"), INF, 2).to_json()
    assert set(d["terms"][0]) == {"re_r", "im_r", "s", "coeff_re", "coeff_im"}


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_expand_at_zero_matches_function(seed):
    f = random_exact_rational(np.random.default_rng(seed), 3)
    try:
        e = expand_at(f, ZP, 12)
    except PoleAtPoint:
        return
    y = 1e-3
    assert abs(e.evaluate(y) - complex(f(y))) <= 1e-9 * max(1.0, abs(complex(f(y))))


def test_power_log_expansion():
    e = expand_expr(ex.parse("t^(1/2)*log(t)/(1+t^2)"), ZP, 4)
    ld = leading_data(e)
    assert (ld.le1, ld.le2) == (0.5, 1)
    e = expand_expr(ex.parse("t^(1/2)/(1+t^2)"), INF, 3)
    assert leading_data(e).le1 == -1.5


# --- noncompensation ------------------------------------------------------------

def test_witness_unimodular():
    w = noncompensation_witness(OscSum((OscTerm(1, 1.0),)))
    assert w.epsilon_hat == pytest.approx(1.0, abs=1e-14)
    assert w.weakest_level == pytest.approx(1.0, abs=1e-14)


def test_witness_sine():
    E = OscSum((OscTerm(1, 1.0), OscTerm(-1, -1.0)))
    assert noncompensation_witness(E).epsilon_hat >= 1.99


def test_witness_empty():
    w = noncompensation_witness(OscSum(()))
    assert w.epsilon_hat == 0 and w.witness_points == ()


def test_witness_requires_levels():
    with pytest.raises(ValueError):
        noncompensation_witness(OscSum((OscTerm(1, 0.0),)), levels=4)


_osc_term = st.builds(
    OscTerm,
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.floats(min_value=-3, max_value=3, allow_nan=False),
    st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), max_size=2).map(lambda p: (0.0, *p) if p else ()),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(_osc_term, min_size=1, max_size=4, unique_by=lambda t: (t.gamma, t.phi)))
def test_witness_positive_and_bounded_below(terms):
    try:
        E = OscSum(tuple(terms))
    except ValueError:
        return
    M = max(abs(t.c) for t in terms)
    w = noncompensation_witness(E)
    if M == 0:
        assert w.epsilon_hat == 0
    else:
        assert w.epsilon_hat > 0
        assert w.epsilon_hat >= M / (2 * len(terms))
    assert len(w.witness_points) == 16
    assert math.isfinite(w.epsilon_hat)
