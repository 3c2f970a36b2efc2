import cmath
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripdecay import expr as ex
from stripdecay.corpus import RATIONAL_L1, random_exact_rational, random_l1_rational
from stripdecay.gaussian import GaussianRational as G
from stripdecay.poly import CPoly, RationalFn, roots
from stripdecay.rational import (
    InsufficientCoefficients,
    classify_integrability,
    degree_bound,
    entire_check,
    partial_fractions,
    pole_table_json,
    poles,
    rationality_test,
    sector_angles,
    strip_widths,
    taylor_coefficients,
)

PI = math.pi


def rat(text):
    return ex.to_rational(ex.parse(text))


def _sorted_roots(rs):
    return sorted(((complex(z), m) for z, m in rs), key=lambda p: (round(p[0].real, 6), round(p[0].imag, 6)))


# --- roots --------------------------------------------------------------------

@pytest.mark.parametrize(
    "coeffs, expected",
    [
        ([1, 0, 1], [(-1j, 1), (1j, 1)]),
        ([-1, -2j, 1], [(1j, 2)]),
        ([2, -3, 1], [(1, 1), (2, 1)]),
    ],
)
def test_roots_examples(coeffs, expected):
    got = _sorted_roots(roots(CPoly(coeffs)))
    exp = _sorted_roots(expected)
    assert [m for _, m in got] == [m for _, m in exp]
    for (a, _), (b, _) in zip(got, exp):
        assert abs(a - b) < 1e-10


def test_float_multiple_roots_cluster():
    p = CPoly.from_roots([0.5 + 1j] * 3 + [-2.0]).to_float()
    got = _sorted_roots(roots(p))
    assert [m for _, m in got] == [1, 3]
    assert abs(got[1][0] - (0.5 + 1j)) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_multiplicities_sum_to_degree(seed):
    rng = np.random.default_rng(seed)
    p = CPoly([complex(rng.normal(), rng.normal()) for _ in range(int(rng.integers(2, 9)))])
    rs = roots(p)
    assert sum(m for _, m in rs) == p.degree
    for z, _ in rs:
        assert abs(p(complex(z))) <= 1e-8 * sum(abs(c) * max(1, abs(z)) ** k for k, c in enumerate(p.to_numpy()))


# --- partial fractions ---------------------------------------------------------

def test_partial_fractions_examples():
    pf = partial_fractions(rat("1/(1+t^2)"))
    by_loc = {round(complex(p.location).imag): p for p in pf.poles}
    assert abs(complex(by_loc[1].principal[0]) - 1 / 2j) < 1e-15
    assert abs(complex(by_loc[-1].principal[0]) + 1 / 2j) < 1e-15
    assert pf.polynomial_part.is_zero()

    (p,) = partial_fractions(rat("1/(t-i)^2")).poles
    assert p.order == 2 and [complex(c) for c in p.principal] == [0, 1]

    pf = partial_fractions(rat("1/((t-i)*(t-2*i))"))
    by_loc = {round(complex(p.location).imag): complex(p.principal[0]) for p in pf.poles}
    assert by_loc == {1: 1j, 2: -1j}


def _probe_points(rng, n=20):
    return rng.normal(scale=2.0, size=n) + 1j * rng.normal(scale=2.0, size=n)


@pytest.mark.parametrize("text", RATIONAL_L1 + ("(t^5-3*t+1)/(t^2+1)", "(t^2-1)/(t-1)", "7"))
def test_partial_fractions_reconstruct(text):
    f = rat(text)
    pf = partial_fractions(f)
    rng = np.random.default_rng(5)
    for z in _probe_points(rng):
        fz = complex(f(complex(z)))
        assert abs(fz - pf(z)) <= 1e-10 * (1 + abs(fz))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_partial_fractions_reconstruct_random(seed):
    rng = np.random.default_rng(seed)
    f = random_l1_rational(rng)
    pf = partial_fractions(f)
    for z in _probe_points(rng):
        fz = complex(f(complex(z)))
        assert abs(fz - pf(z)) <= 1e-10 * (1 + abs(fz))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_residue_sum_zero(seed):
    f = random_l1_rational(np.random.default_rng(seed))
    total = sum(complex(p.principal[0]) for p in poles(f))
    assert abs(total) <= 1e-9


@pytest.mark.parametrize("text", RATIONAL_L1)
def test_residue_sum_zero_corpus(text):
    assert abs(sum(complex(p.principal[0]) for p in poles(rat(text)))) <= 1e-9


def test_exact_poles_are_exact():
    (p,) = [q for q in poles(rat("1/((t-1/2-i)*(t+1+i/2))")) if complex(q.location).imag > 0]
    assert p.exact_location == G(Fraction(1, 2), 1)


def test_pole_table_json():
    rows = pole_table_json(rat("1/(t-i)^2"))
    json.dumps(rows)
    assert rows[0]["order"] == 2
    assert [r["j"] for r in rows[0]["principal"]] == [1, 2]


# --- integrability ----------------------------------------------------------------

def test_integrability_examples():
    r = classify_integrability(rat("1/(1+t^2)"))
    assert r.L1_on_R and r.smooth_on_R and r.continuous_on_R and r.degree_gap == 2
    r = classify_integrability(rat("1/t"))
    assert not r.L1_on_R and r.real_poles and r.degree_gap == 1 and not r.continuous_on_R
    r = classify_integrability(rat("t/(1+t^2)"))
    assert not r.L1_on_R and r.smooth_on_R and r.degree_gap == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_integrability_invariants(seed):
    f = random_exact_rational(np.random.default_rng(seed), 4)
    r = classify_integrability(f)
    assert (not r.smooth_on_R) or r.continuous_on_R
    assert r.L1_on_R == (not r.real_poles and r.degree_gap >= 2)


# --- strips and sectors ---------------------------------------------------------------

@pytest.mark.parametrize(
    "text, expected",
    [("1/(1+t^2)", (1, 1)), ("1/(t-i)^2", (1, math.inf)), ("1/((t-i)*(t-2*i))", (1, math.inf))],
)
def test_strip_widths_examples(text, expected):
    assert strip_widths(rat(text)) == pytest.approx(expected)


def test_strip_widths_real_pole():
    assert strip_widths(rat("1/(t*(t^2+1))")) == (0, 0)


@pytest.mark.parametrize(
    "text, expected",
    [("1/(1+t^2)", (PI / 2, PI / 2)), ("1/(1+t)", (PI, PI)), ("1+t", (math.inf, math.inf))],
)
def test_sector_angles_examples(text, expected):
    assert sector_angles(rat(text)) == pytest.approx(expected)


def test_sector_angles_asymmetric():
    # pole at e^{i pi/3} is reached after pi/3 counterclockwise, 5pi/3 clockwise
    w = cmath.exp(1j * PI / 3)
    f = RationalFn(CPoly([1]), CPoly([-w, 1]))
    assert sector_angles(f) == pytest.approx((PI / 3, 5 * PI / 3))


def test_sector_angles_pole_on_positive_axis():
    assert sector_angles(rat("1/((t-2)*(t^2+1))")) == (0, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_strip_and_sector_scale_invariant(seed, c):
    f = random_l1_rational(np.random.default_rng(seed))
    g = f * c
    assert strip_widths(g) == pytest.approx(strip_widths(f), abs=1e-9)
    assert sector_angles(g) == pytest.approx(sector_angles(f), abs=1e-9)


# --- entire check -------------------------------------------------------------------

def test_entire_check_examples():
    r = entire_check(rat("(t^2-1)/(t-1)"))
    assert r.entire and r.polynomial == CPoly([1, 1])
    assert not entire_check(rat("1/(1+t^2)")).entire
    r = entire_check(rat("5"))
    assert r.entire and r.polynomial == CPoly([5])


# --- rationality --------------------------------------------------------------------

def test_rationality_geometric():
    res = rationality_test([1] * 12, 1)
    assert res.rational
    # 1/(1 - y), compared after normalisation
    assert res.reconstruction == RationalFn(CPoly([1]), CPoly([1, -1]))


def test_rationality_factorial_rejected():
    coeffs = [Fraction(1, math.factorial(j)) for j in range(12)]
    assert not rationality_test(coeffs, 3).rational
    assert degree_bound(coeffs, 4) is None
    floats = [1 / math.factorial(j) for j in range(12)]
    assert not rationality_test(floats, 3).rational


def test_rationality_zero():
    res = rationality_test([0] * 4, 0)
    assert res.rational and res.reconstruction.is_zero()


def test_rationality_insufficient():
    with pytest.raises(InsufficientCoefficients):
        rationality_test([1, 2, 3], 1)
    with pytest.raises(InsufficientCoefficients):
        degree_bound([1, 2, 3, 4], 3)


def test_degree_bound_examples():
    assert degree_bound([j + 1 for j in range(10)], 4) == 2
    assert degree_bound([1] * 8, 3) == 1


def test_float_path_reconstructs():
    f = rat("(1+2*t)/(1-t/3+t^2/5)").to_float()
    coeffs = taylor_coefficients(f, 10)
    res = rationality_test(coeffs, 2)
    assert res.rational
    g = res.reconstruction
    for z in (0.1, 0.3 + 0.2j, -0.4):
        assert abs(complex(g(z)) - complex(f(z))) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_rationality_recovers_random(seed):
    f = random_exact_rational(np.random.default_rng(seed), 4)
    K = max(f.num.degree, f.den.degree)
    coeffs = taylor_coefficients(f, 2 * K + 2)
    res = rationality_test(coeffs, K)
    assert res.rational
    g = res.reconstruction
    # proportional to f: cross-multiplied identity exact in Q(i)
    assert g.num * f.den == f.num * g.den
    d = degree_bound(coeffs, K)
    assert d is not None and d <= K
    for k in range(d, K + 1):
        assert rationality_test(coeffs, k).rational
