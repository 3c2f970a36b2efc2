import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripdecay import expr as ex
from stripdecay.corpus import MELLIN_SET, POWER_LOG, RATIONAL_L1, random_l1_rational
from stripdecay.oracle import UnsupportedClass
from stripdecay.poly import CPoly, RationalFn
from stripdecay.rational import poles, sector_angles, strip_widths
from stripdecay.transforms import (
    MellinStripError,
    NotL1,
    PreconditionError,
    closed_form_decay,
    deep_decay_fit,
    delta_report,
    derivative_relation_check,
    ec_strip_widths,
    ec_transform,
    eval_fourier_cf,
    fourier_closed_form,
    half_plane_vanishing,
    ibp_relation_check,
    log_abs_fourier_cf,
    mellin_bridge,
    mellin_direct,
    mellin_eval,
    mellin_strip,
)

PI = math.pi


def rat(text):
    return ex.to_rational(ex.parse(text))


# --- closed forms ----------------------------------------------------------------

def test_lorentzian_closed_form_terms():
    cf = fourier_closed_form(rat("1/(1+t^2)"))
    (neg,), (pos,) = cf.xi_neg, cf.xi_pos
    assert abs(neg.omega - 1j) < 1e-15 and abs(pos.omega + 1j) < 1e-15
    assert abs(neg.poly[0] - PI) <= 1e-12 and abs(pos.poly[0] - PI) <= 1e-12
    xs = np.linspace(-3, 3, 61)
    assert np.allclose(eval_fourier_cf(cf, xs), PI * np.exp(-2 * PI * np.abs(xs)), atol=1e-15)
    assert abs(eval_fourier_cf(cf, 1.0) - 5.86674e-3) < 1e-8
    assert abs(eval_fourier_cf(cf, 0.0) - PI) < 1e-14


def test_double_pole_closed_form():
    cf = fourier_closed_form(rat("1/(t-i)^2"))
    assert cf.xi_pos == ()
    (term,) = cf.xi_neg
    assert abs(term.poly[0]) <= 1e-12
    assert abs(term.poly[1] - 4 * PI ** 2) <= 1e-12
    assert eval_fourier_cf(cf, 2.0) == 0
    xs = np.linspace(-3, -0.1, 30)
    assert np.allclose(eval_fourier_cf(cf, xs), 4 * PI ** 2 * xs * np.exp(2 * PI * xs), atol=1e-13)


def test_two_pole_closed_form():
    cf = fourier_closed_form(rat("1/((t-i)*(t-2*i))"))
    xs = np.linspace(-2, -0.05, 25)
    expected = -2 * PI * np.exp(2 * PI * xs) + 2 * PI * np.exp(4 * PI * xs)
    assert np.allclose(eval_fourier_cf(cf, xs), expected, atol=1e-13)
    assert np.all(eval_fourier_cf(cf, -xs) == 0)


@pytest.mark.parametrize("bad", ["1/t", "t/(1+t^2)", "t^2+1"])
def test_closed_form_requires_l1(bad):
    with pytest.raises(NotL1):
        fourier_closed_form(rat(bad))


@pytest.mark.parametrize("text", RATIONAL_L1)
def test_continuous_at_zero(text):
    cf = fourier_closed_form(rat(text))
    eps = 1e-9
    left, right = eval_fourier_cf(cf, -eps), eval_fourier_cf(cf, eps)
    assert abs(left - right) < 1e-6
    assert abs(eval_fourier_cf(cf, 0.0) - 0.5 * (left + right)) < 1e-6


def test_closed_form_json_tags():
    d = fourier_closed_form(rat("1/(1+t^2)")).to_json()
    assert set(d) == {"xi_neg", "xi_pos", "at_zero"}
    json.dumps(d)


@pytest.mark.parametrize("text", [s for s in RATIONAL_L1 if min(strip_widths(rat(s))) >= 0.1])
def test_riemann_lebesgue_at_fifty(text):
    cf = fourier_closed_form(rat(text))
    assert abs(eval_fourier_cf(cf, 50.0)) <= 1e-12
    assert abs(eval_fourier_cf(cf, -50.0)) <= 1e-12


def _real_l1(rng):
    # conjugate-symmetric pole sets give real-valued rational functions
    n = int(rng.integers(1, 3))
    locs = []
    for _ in range(n):
        z = complex(rng.uniform(-2, 2), rng.uniform(0.3, 3))
        locs += [z, z.conjugate()]
    den = CPoly.from_roots(locs)
    num = CPoly([float(rng.normal()) for _ in range(int(rng.integers(1, 2 * n)))])
    return RationalFn(num, den)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6), st.floats(min_value=0.05, max_value=3.0))
def test_conjugation_symmetry(seed, xi):
    f = _real_l1(np.random.default_rng(seed))
    cf = fourier_closed_form(f)
    a, b = eval_fourier_cf(cf, -xi), eval_fourier_cf(cf, xi)
    assert abs(a - b.conjugate()) <= 1e-10 * max(1.0, abs(a))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    f, g = random_l1_rational(rng, double_prob=0), random_l1_rational(rng, double_prob=0)
    pf = {round(p.location.real, 6) + 1j * round(p.location.imag, 6) for p in poles(f)}
    pg = {round(p.location.real, 6) + 1j * round(p.location.imag, 6) for p in poles(g)}
    if pf & pg:
        return
    h = f * a + g * b
    xs = np.linspace(-2, 2, 17)
    lhs = eval_fourier_cf(fourier_closed_form(h), xs) if not h.is_zero() else np.zeros_like(xs)
    rhs = a * eval_fourier_cf(fourier_closed_form(f), xs) + b * eval_fourier_cf(fourier_closed_form(g), xs)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, float(np.max(np.abs(rhs))))


@pytest.mark.parametrize("text", RATIONAL_L1)
def test_exact_decay_bound(text):
    f = rat(text)
    cf = fourier_closed_form(f)
    dp, dm = strip_widths(f)
    mu = max(p.order for p in poles(f))
    for side, delta in ((1, dp), (-1, dm)):
        if math.isinf(delta):
            continue
        xs = -side * np.linspace(0.5, 12, 100)
        scaled = np.abs(eval_fourier_cf(cf, xs)) * np.exp(2 * PI * delta * np.abs(xs))
        C = float(np.max(scaled[:5] / (1 + np.abs(xs[:5])) ** (mu - 1)))
        assert np.all(scaled <= 10 * max(C, 1.0) * (1 + np.abs(xs)) ** (mu - 1))


# --- half-plane vanishing ---------------------------------------------------------------

@pytest.mark.parametrize(
    "text, plus, minus",
    [("1/(t-i)^2", False, True), ("1/(1+t^2)", False, False), ("1/((t+i)*(t+2*i))", True, False)],
)
def test_half_plane_vanishing_examples(text, plus, minus):
    hv = half_plane_vanishing(rat(text))
    assert (hv.plus, hv.minus) == (plus, minus)


# --- deep fits and log magnitudes -------------------------------------------------------

def test_log_abs_matches_direct_evaluation():
    cf = fourier_closed_form(rat("(t+3)/((t^2+1/4)*(t^2+2*t+5))"))
    xs = np.array([-3.0, -0.7, 0.4, 2.5])
    assert np.allclose(log_abs_fourier_cf(cf, xs), np.log(np.abs(eval_fourier_cf(cf, xs))), atol=1e-10)
    far = log_abs_fourier_cf(cf, np.array([400.0]))[0]
    assert math.isfinite(far) and far < -700


def test_log_abs_of_empty_branch():
    cf = fourier_closed_form(rat("1/(t-i)^2"))
    assert log_abs_fourier_cf(cf, np.array([1.0]))[0] == -math.inf


@pytest.mark.parametrize("text", RATIONAL_L1)
def test_deep_fit_recovers_strip(text):
    f = rat(text)
    cf = fourier_closed_form(f)
    for side, delta in zip((1, -1), strip_widths(f)):
        fit = deep_decay_fit(cf, side)
        if math.isinf(delta):
            assert fit.rate == math.inf
        else:
            assert abs(fit.rate - delta) <= 1e-3 * delta


# --- Mellin ----------------------------------------------------------------------------

@pytest.mark.parametrize(
    "text, strip",
    [("1/(1+t^2)", (0, 2)), ("1/(1+t)^3", (0, 3)), ("t/(1+t^4)", (-1, 3)), ("t^(1/2)/(1+t^2)", (-0.5, 1.5))],
)
def test_mellin_strip_examples(text, strip):
    e = ex.parse(text)
    target = ex.to_rational(e) if ex.classify(e) is ex.FunctionClass.RATIONAL else e
    s = mellin_strip(target)
    assert (s.alpha, s.beta) == pytest.approx(strip)


def test_mellin_strip_errors():
    with pytest.raises(MellinStripError) as info:
        mellin_strip(rat("1/(t-1)^2"))
    assert info.value.side == "pole"
    with pytest.raises(MellinStripError) as info:
        mellin_strip(rat("1/(t^2+t)"))
    assert info.value.side == "pole"
    with pytest.raises(MellinStripError) as info:
        mellin_strip(rat("1/(t^2+1)*(t^3+t+1)"))
    assert info.value.side == "+inf"
    with pytest.raises(MellinStripError) as info:
        mellin_strip(ex.parse("t^(-3/2)/(1+t^2)"))
    assert info.value.side == "0+"


def test_ec_transform_examples():
    u = np.linspace(-30, 30, 121)
    g = ec_transform(ex.parse("1/(1+t^2)"), 1.0)
    assert np.allclose(g(u), 1 / (2 * np.cosh(u)), rtol=1e-12, atol=0)
    assert np.allclose(ec_transform(ex.parse("1"), 0.0)(u), 1.0)
    assert np.allclose(ec_transform(ex.parse("t"), -1.0)(u), 1.0)
    h = ec_transform(ex.parse("t^(1/2)/(1+t^2)"), 0.25)
    assert abs(h(0.3) - math.exp(0.25 * 0.3) * math.exp(0.15) / (1 + math.exp(0.6))) < 1e-14


def test_mellin_eval_examples():
    f = ex.parse("1/(1+t^2)")
    assert abs(mellin_eval(f, 1) - PI / 2) <= 1e-7
    s = complex(1, 2 * PI * 0.1)
    expected = PI / (2 * math.cosh(0.1 * PI ** 2))
    assert abs(mellin_eval(f, s) - expected) <= 1e-7
    assert abs(expected - 1.028084) < 1e-6
    assert abs(mellin_eval(f, s, method="direct") - expected) <= 1e-7
    with pytest.raises(UnsupportedClass):
        mellin_eval(ex.parse("exp(i*t^2)/(1+t^2)"), 1)
    with pytest.raises(MellinStripError):
        mellin_eval(f, 2.5)
    with pytest.raises(ValueError):
        mellin_eval(f, 1, method="series")


def test_mellin_matches_sine_formula():
    f = rat("1/(1+t^2)")
    for s in (0.5, 1.3 + 0.4j, 1.7 - 1.1j):
        assert abs(mellin_eval(f, s) - PI / (2 * cmath.sin(PI * s / 2))) <= 1e-8


def _s_points(strip):
    c = 0.5 * (strip.alpha + strip.beta)
    return [complex(c, 2 * PI * eta) for eta in (-0.25, -0.1, 0.0, 0.1, 0.25)]


@pytest.mark.parametrize("text", MELLIN_SET)
def test_mellin_bridge_vs_direct(text):
    f = rat(text)
    strip = mellin_strip(f)
    for s in _s_points(strip):
        assert abs(mellin_bridge(f, s, strip=strip) - mellin_direct(f, s, strip=strip)) <= 1e-7


@pytest.mark.parametrize("text", POWER_LOG)
def test_mellin_bridge_power_log(text):
    e = ex.parse(text)
    strip = mellin_strip(e)
    for s in _s_points(strip)[::2]:
        assert abs(mellin_bridge(e, s, strip=strip) - mellin_direct(e, s, strip=strip)) <= 1e-7


def test_mellin_of_log_example():
    # int_0^inf t^(s-1) log t / (1+t^2) dt = d/ds [pi / (2 sin(pi s / 2))]
    s = 1.2
    expected = -(PI ** 2 / 4) * math.cos(PI * s / 2) / math.sin(PI * s / 2) ** 2
    assert abs(mellin_eval(ex.parse("log(t)/(1+t^2)"), s) - expected) <= 1e-8


# --- identities ---------------------------------------------------------------------------

@pytest.mark.parametrize("text", RATIONAL_L1 + MELLIN_SET)
def test_delta_identities(text):
    f = rat(text)
    d = delta_report(f)
    if text in RATIONAL_L1:
        assert d.delta_F_exact == d.delta_H
    else:
        # a real pole: no transform, and the strip collapses
        assert d.delta_H == (0, 0)
    assert d.delta_M == pytest.approx(d.theta_H, abs=1e-12)
    json.dumps(d.to_json())


def test_delta_report_example():
    d = delta_report(rat("1/(1+t^2)"))
    assert d.delta_H == (1, 1)
    assert d.theta_H == pytest.approx((PI / 2, PI / 2))
    assert d.to_json()["delta_H"] == {"+": 1.0, "-": 1.0}


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_ec_strip_equals_sector(seed):
    f = random_l1_rational(np.random.default_rng(seed))
    assert ec_strip_widths(f) == pytest.approx(sector_angles(f), abs=1e-12)


def test_closed_form_decay_matches_strips():
    for text in RATIONAL_L1:
        f = rat(text)
        assert closed_form_decay(fourier_closed_form(f)) == pytest.approx(strip_widths(f))


# --- relations ---------------------------------------------------------------------------

def test_derivative_relation_examples():
    xs = [-1.0, -0.5, 0.5, 1.0]
    assert derivative_relation_check(rat("1/(1+t^2)^2"), 1, xs) <= 1e-5
    assert derivative_relation_check(rat("1/(1+t^2)"), 0, xs) == 0
    with pytest.raises(PreconditionError):
        derivative_relation_check(rat("1/(1+t^2)"), 1, xs)


def test_derivative_relation_second_order():
    assert derivative_relation_check(rat("1/(1+t^2)^2"), 2, [-0.7, 0.9], h=1e-3) <= 1e-4


def test_ibp_relation_examples():
    assert ibp_relation_check(rat("1/(1+t^2)"), 1.0) <= 1e-9
    assert ibp_relation_check(rat("1/(t-i)^2"), -1.0) <= 1e-9
    with pytest.raises(PreconditionError):
        ibp_relation_check(rat("1/(1+t^2)"), 0.0)


@pytest.mark.parametrize("text", RATIONAL_L1)
def test_ibp_relation_corpus(text):
    for xi in (-1.3, 0.4, 2.0):
        assert ibp_relation_check(rat(text), xi) <= 1e-9
