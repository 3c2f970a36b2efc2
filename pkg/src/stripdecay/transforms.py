"""Exact residue Fourier transforms, half-plane vanishing and the Mellin bridge."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import expr as ex
from .oracle import DecayFit, QuadConfig, UnsupportedClass, decay_fit_log
from .poly import CPoly, RationalFn
from .quadrature import integrate_intervals
from .rational import classify_integrability, partial_fractions, poles, sector_angles, strip_widths
from .series import Boundary, expand_at, expand_expr, leading_data

TWO_PI = 2.0 * math.pi


class NotL1(ValueError):
    pass


# ---------------------------------------------------------------------------
# closed-form Fourier transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CFTerm:
    """``exp(-i 2 pi omega xi) * sum_k poly[k] xi**k``."""

    omega: complex
    poly: tuple

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        acc = np.zeros(xi.shape, dtype=complex)
        for c in reversed(self.poly):
            acc = acc * xi + c
        return np.exp(-1j * TWO_PI * self.omega * xi) * acc

    def to_json(self) -> dict:
        return {
            "omega": [self.omega.real, self.omega.imag],
            "poly": [[c.real, c.imag] for c in self.poly],
        }


@dataclass(frozen=True)
class FourierClosedForm:
    xi_neg: tuple  # CFTerm for poles with Im > 0
    xi_pos: tuple  # CFTerm for poles with Im < 0
    value_at_zero: complex

    def __call__(self, xi):
        return eval_fourier_cf(self, xi)

    def to_json(self) -> dict:
        return {
            "xi_neg": [t.to_json() for t in self.xi_neg],
            "xi_pos": [t.to_json() for t in self.xi_pos],
            "at_zero": {"re": self.value_at_zero.real, "im": self.value_at_zero.imag},
        }


def _branch(f: RationalFn, sigma: int) -> tuple:
    terms = []
    for p in partial_fractions(f).poles:
        if sigma * p.location.imag <= 0:
            continue
        coeffs = []
        for j, P in enumerate(p.principal, start=1):
            k = j - 1
            coeffs.append(sigma * 1j * TWO_PI * complex(P) * (-1j * TWO_PI) ** k / math.factorial(k))
        terms.append(CFTerm(p.location, tuple(coeffs)))
    return tuple(terms)


def fourier_closed_form(f: RationalFn) -> FourierClosedForm:
    """Residue-sum transform of an integrable rational function.

    The branch for ``xi < 0`` closes the contour in the upper half-plane
    (``sigma = +1``), the branch for ``xi > 0`` in the lower one.
    """
    rep = classify_integrability(f)
    if rep.real_poles:
        raise NotL1("real pole: the Fourier integral does not converge absolutely")
    if not rep.L1_on_R:
        raise NotL1(f"degree gap {rep.degree_gap} < 2: not integrable at infinity")
    neg, pos = _branch(f, +1), _branch(f, -1)
    lim_neg = sum((t.poly[0] for t in neg), 0j)
    lim_pos = sum((t.poly[0] for t in pos), 0j)
    return FourierClosedForm(neg, pos, 0.5 * (lim_neg + lim_pos))


def eval_fourier_cf(cf: FourierClosedForm, xi):
    x = np.asarray(xi, dtype=float)
    neg = np.zeros(x.shape, dtype=complex)
    pos = np.zeros(x.shape, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        xn = np.where(x < 0, x, 0.0)
        xp = np.where(x > 0, x, 0.0)
        for t in cf.xi_neg:
            neg = neg + t(xn)
        for t in cf.xi_pos:
            pos = pos + t(xp)
    out = np.where(x < 0, neg, np.where(x > 0, pos, cf.value_at_zero))
    return complex(out) if out.shape == () else out


def log_abs_fourier_cf(cf: FourierClosedForm, xi) -> np.ndarray:
    """``log|F(xi)|`` for nonzero ``xi``, computed without underflow.

    Each term's exponential growth ``2 pi Im(omega) xi`` is pulled out in log
    space and the largest one is factored from the sum at every point, so the
    result stays finite far beyond the range of double precision. Branches
    without poles give ``-inf``.
    """
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(x == 0):
        raise ValueError("log_abs_fourier_cf is defined for xi != 0 only")
    out = np.full(x.shape, -np.inf)
    for mask, terms in ((x < 0, cf.xi_neg), (x > 0, cf.xi_pos)):
        if not terms or not np.any(mask):
            continue
        xs = x[mask]
        expo = np.array([TWO_PI * t.omega.imag * xs for t in terms])
        top = np.max(expo, axis=0)
        acc = np.zeros(xs.shape, dtype=complex)
        for t, e in zip(terms, expo):
            p = np.zeros(xs.shape, dtype=complex)
            for c in reversed(t.poly):
                p = p * xs + c
            acc += p * np.exp(e - top) * np.exp(-1j * TWO_PI * t.omega.real * xs)
        with np.errstate(divide="ignore"):
            out[mask] = top + np.log(np.abs(acc))
    return out


@dataclass(frozen=True)
class HalfPlaneVanishing:
    """``plus``: transform vanishes for xi <= 0; ``minus``: for xi >= 0."""

    plus: bool
    minus: bool

    @property
    def vanishes_xi_neg(self) -> bool:
        return self.plus

    @property
    def vanishes_xi_pos(self) -> bool:
        return self.minus


def half_plane_vanishing(f: RationalFn) -> HalfPlaneVanishing:
    cf = fourier_closed_form(f)
    return HalfPlaneVanishing(plus=not cf.xi_neg, minus=not cf.xi_pos)


# ---------------------------------------------------------------------------
# Mellin transforms through the exponential substitution
# ---------------------------------------------------------------------------

class MellinStripError(ValueError):
    def __init__(self, message: str, side: str):
        super().__init__(message)
        self.side = side


@dataclass(frozen=True)
class MellinStrip:
    alpha: float
    beta: float

    def __contains__(self, c: float) -> bool:
        return self.alpha < c < self.beta

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}


def _require_positive_axis_clear(f: RationalFn) -> None:
    for p in poles(f):
        if p.is_real and p.location.real >= -1e-9:
            raise MellinStripError(f"pole at t = {p.location.real:.6g} on the half-line t >= 0", "pole")


def mellin_strip(f) -> MellinStrip:
    """``alpha = -LE1`` at ``0+`` and ``beta = -LE1`` at ``+inf`` (affine)."""
    if isinstance(f, RationalFn):
        _require_positive_axis_clear(f)
        le0 = leading_data(expand_at(f, Boundary.zero_plus(), 1)).le1 if not f.is_zero() else -math.inf
        leinf = leading_data(expand_at(f, Boundary.infinity(), 1)).le1 if not f.is_zero() else math.inf
    else:
        e = ex.parse(f) if isinstance(f, str) else f
        cls = ex.classify(e)
        if cls is ex.FunctionClass.RATIONAL:
            return mellin_strip(ex.to_rational(e))
        if cls is not ex.FunctionClass.POWER_LOG:
            raise UnsupportedClass(f"no Mellin strip for class {cls.value}")
        for q in ex._denominators(e):
            _require_positive_axis_clear(RationalFn(CPoly([1]), q))
        le0 = leading_data(expand_expr(e, Boundary.zero_plus(), 2)).le1
        leinf = leading_data(expand_expr(e, Boundary.infinity(), 2)).le1
    alpha, beta = -le0, -leinf
    if not le0 > -1:
        raise MellinStripError(f"not integrable at 0+ (LE1 = {le0:g} <= -1)", "0+")
    if not leinf < -1:
        raise MellinStripError(f"not integrable at +inf (LE1 = {leinf:g} >= -1)", "+inf")
    return MellinStrip(float(alpha) + 0.0, float(beta) + 0.0)


@dataclass(frozen=True)
class ECTransform:
    """``u -> exp(c u) f(exp u)``, overflow-safe for rational ``f``."""

    f: object
    c: float

    def __post_init__(self):
        if isinstance(self.f, str):
            object.__setattr__(self, "f", ex.parse(self.f))
        if not isinstance(self.f, RationalFn) and ex.classify(self.f) is ex.FunctionClass.RATIONAL:
            object.__setattr__(self, "f", ex.to_rational(self.f))

    @property
    def text(self) -> str:
        inner = ex.to_text(self.f) if isinstance(self.f, ex.Node) else "f"
        return f"exp({self.c!r}*u)*({inner})[t := exp(u)]"

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if isinstance(self.f, RationalFn):
            return self._rational(u)
        with np.errstate(over="ignore"):
            return np.exp(self.c * u) * ex.eval_real(self.f, np.exp(u))

    def _rational(self, u: np.ndarray):
        f = self.f.to_float()
        num = np.array(f.num.coeffs, dtype=complex)
        den = np.array(f.den.coeffs, dtype=complex)
        dn, dd = len(num) - 1, len(den) - 1
        out = np.empty(u.shape, dtype=complex)
        small = u <= 0
        x = np.exp(u[small])
        out[small] = np.exp(self.c * u[small]) * np.polynomial.polynomial.polyval(x, num) / np.polynomial.polynomial.polyval(x, den)
        # for u > 0 rewrite in w = exp(-u) so nothing overflows
        w = np.exp(-u[~small])
        nr = np.polynomial.polynomial.polyval(w, num[::-1])
        dr = np.polynomial.polynomial.polyval(w, den[::-1])
        out[~small] = np.exp((self.c + dn - dd) * u[~small]) * nr / dr
        return out


def ec_transform(e, c: float) -> ECTransform:
    return ECTransform(e, float(c))


def _tail_extent(g, rate: float, direction: int, tol: float) -> float:
    """Distance after which ``|g|/rate`` stays below ``tol``."""
    U = 4.0
    while U < 2000:
        probe = direction * np.array([U, U * 1.1, U * 1.25])
        if np.max(np.abs(g(probe))) / max(rate, 1e-3) < tol:
            return U
        U *= 1.3
    return U


def mellin_bridge(f, s: complex, cfg: QuadConfig = QuadConfig(), strip: MellinStrip | None = None) -> complex:
    """``M[f](s)`` as the Fourier transform of ``E^c f`` at ``-Im(s)/(2 pi)``."""
    strip = strip or mellin_strip(f)
    c, w = s.real, s.imag
    if c not in strip:
        raise MellinStripError(f"Re s = {c:g} outside the strip ({strip.alpha:g}, {strip.beta:g})", "strip")
    g = ec_transform(f, c)
    tol = cfg.abs_tol / 100
    lo = -_tail_extent(g, c - strip.alpha, -1, tol)
    hi = _tail_extent(g, strip.beta - c, 1, tol)
    n = max(32, int(math.ceil(abs(w) * (hi - lo) / math.pi)) + 1)
    edges = np.linspace(lo, hi, n + 1)

    def integrand(u):
        return g(u) * np.exp(1j * w * u)

    return integrate_intervals(integrand, edges, cfg.abs_tol / 10, cfg.rel_tol, cfg.max_panels).total


def _geometric_to_zero(func, cfg: QuadConfig, ratio: float = 0.25, max_panels: int = 4000) -> complex:
    """``int_0^1 func`` on panels ``[ratio^(k+1), ratio^k]`` with a geometric tail estimate."""
    total = 0j
    prev = None
    hi = 1.0
    tol = cfg.abs_tol / 10
    for k in range(max_panels):
        lo = hi * ratio
        v = integrate_intervals(func, np.linspace(lo, hi, 3), tol / 100, cfg.rel_tol, cfg.max_panels).total
        total += v
        if prev is not None and abs(prev) > 0:
            r = v / prev
            if abs(r) < 0.98:
                rest = v * r / (1 - r)
                if abs(rest) < tol * 1e-2 or (abs(v) < tol * 1e-3 and k > 8):
                    return total + rest
        prev = v
        hi = lo
        if hi < 1e-300:
            break
    return total


def mellin_direct(f, s: complex, cfg: QuadConfig = QuadConfig(), strip: MellinStrip | None = None) -> complex:
    """``int_0^inf t^(s-1) f(t) dt`` split at 1, both halves mapped onto ``(0, 1]``."""
    strip = strip or mellin_strip(f)
    if s.real not in strip:
        raise MellinStripError(f"Re s = {s.real:g} outside the strip ({strip.alpha:g}, {strip.beta:g})", "strip")
    if isinstance(f, str):
        f = ex.parse(f)
    if isinstance(f, RationalFn):
        ff = f.to_float()
        evalf = lambda t: ff(t)
    else:
        evalf = lambda t: ex.eval_real(f, t)

    def near(t):
        t = np.asarray(t, dtype=float)
        return np.exp((s - 1) * np.log(t)) * evalf(t)

    def far(u):
        u = np.asarray(u, dtype=float)
        return np.exp((-s - 1) * np.log(u)) * evalf(1.0 / u)

    return _geometric_to_zero(near, cfg) + _geometric_to_zero(far, cfg)


def mellin_eval(f, s: complex, oracle: QuadConfig = QuadConfig(), method: str = "bridge") -> complex:
    """Mellin transform at ``s``; ``method`` is ``"bridge"`` or ``"direct"``."""
    if isinstance(f, str):
        f = ex.parse(f)
    if isinstance(f, ex.Node):
        cls = ex.classify(f)
        if cls is ex.FunctionClass.RATIONAL:
            f = ex.to_rational(f)
        elif cls is not ex.FunctionClass.POWER_LOG:
            raise UnsupportedClass(f"no Mellin transform for class {cls.value}")
    s = complex(s)
    if method == "bridge":
        return mellin_bridge(f, s, oracle)
    if method == "direct":
        return mellin_direct(f, s, oracle)
    raise ValueError(f"unknown method {method!r}")


def ec_strip_widths(f: RationalFn) -> tuple[float, float]:
    """Strip widths of ``E^c f`` from the logarithms of the poles of ``f``.

    A pole ``w`` of ``f`` gives poles ``log|w| + i(arg w + 2 pi k)`` of the
    substituted function; the nearest ones above and below the real axis
    give the widths.
    """
    up, down = math.inf, math.inf
    for p in poles(f):
        w = p.location
        if abs(w) == 0 or (p.is_real and w.real > 0):
            return 0.0, 0.0
        a = math.pi if (p.is_real and w.real < 0) else cmath.phase(w)
        for k in (-1, 0, 1):
            im = a + 2 * math.pi * k
            if im > 0:
                up = min(up, im)
            elif im < 0:
                down = min(down, -im)
    return up, down


# ---------------------------------------------------------------------------
# relations between transforms
# ---------------------------------------------------------------------------

class PreconditionError(ValueError):
    pass


def _times_power(f: RationalFn, k: int) -> RationalFn:
    c = (-1j * TWO_PI) ** k
    return RationalFn(f.num.to_float() * CPoly([0] * k + [c]), f.den)


def _central_derivative(F, xi: float, k: int, h: float) -> complex:
    acc = 0j
    for j in range(k + 1):
        acc += (-1) ** j * math.comb(k, j) * F(xi + (k / 2 - j) * h)
    return acc / h ** k


def derivative_relation_check(f: RationalFn, k: int, xi_samples: Sequence[float], oracle=None, h: float = 1e-4) -> float:
    """Max gap between the k-th derivative of the transform and the transform of ``(-i2pi t)^k f``."""
    if f.degree_gap < k + 2:
        raise PreconditionError(f"degree gap {f.degree_gap} < k + 2 = {k + 2}")
    cf = fourier_closed_form(f)
    if k == 0:
        return 0.0
    cfk = fourier_closed_form(_times_power(f, k))
    F = lambda x: eval_fourier_cf(cf, x)
    return max(abs(_central_derivative(F, float(x), k, h) - eval_fourier_cf(cfk, float(x))) for x in xi_samples)


def ibp_relation_check(f: RationalFn, xi: float, oracle=None) -> float:
    """``|F[f](xi) - F[f'](xi) / (i 2 pi xi)|`` from closed forms."""
    if xi == 0:
        raise PreconditionError("the relation needs xi != 0")
    rep = classify_integrability(f)
    if not (rep.L1_on_R and rep.continuous_on_R):
        raise PreconditionError("f must be L1 and continuous")
    a = eval_fourier_cf(fourier_closed_form(f), xi)
    b = eval_fourier_cf(fourier_closed_form(f.derivative()), xi)
    return abs(a - b / (1j * TWO_PI * xi))


# ---------------------------------------------------------------------------
# the decay identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaReport:
    delta_H: tuple
    delta_F_exact: tuple
    theta_H: tuple
    delta_M: tuple

    def to_json(self) -> dict:
        def pair(p):
            return {"+": _num(p[0]), "-": _num(p[1])}

        return {
            "delta_H": pair(self.delta_H),
            "delta_F_exact": pair(self.delta_F_exact),
            "theta_H": pair(self.theta_H),
            "delta_M": pair(self.delta_M),
        }


def _num(x: float):
    return ("inf" if x > 0 else "-inf") if math.isinf(x) else x


def closed_form_decay(cf: FourierClosedForm) -> tuple[float, float]:
    """Exponential rates read off the closed form: slowest surviving term per branch."""

    def rate(terms):
        live = [abs(t.omega.imag) for t in terms if any(abs(c) > 0 for c in t.poly)]
        return min(live) if live else math.inf

    return rate(cf.xi_neg), rate(cf.xi_pos)


def deep_decay_fit(cf: FourierClosedForm, side: int, decades: float = 1500.0,
                   density: float = 64.0, max_xi: float = 1e4) -> DecayFit:
    """Envelope fit of the closed form on a window chosen from the data.

    The window ``[hi/4, hi]`` grows until ``|F|`` has fallen ``decades``
    orders of magnitude below its level near ``|xi| = 1``, which pushes
    nearby subdominant poles out of the fit. Sampling uses ``density``
    points per unit of ``|xi|`` so beats between poles are resolved.
    """
    sgn = -side
    terms = cf.xi_neg if side > 0 else cf.xi_pos
    lo_grid = sgn * np.linspace(1.0, 2.0, 33)
    if not terms:
        grid = sgn * np.linspace(2.0, 8.0, 64)
        return decay_fit_log(grid, log_abs_fourier_cf(cf, grid), side)
    ref = float(np.max(log_abs_fourier_cf(cf, lo_grid)))
    drop = decades * math.log(10.0)
    hi = 8.0
    while hi < max_xi and ref - float(log_abs_fourier_cf(cf, np.array([sgn * hi]))[0]) < drop:
        hi *= 1.5
    hi = min(hi, max_xi)
    grid = sgn * np.linspace(hi / 4, hi, max(64, int(density * hi)))
    return decay_fit_log(grid, log_abs_fourier_cf(cf, grid), side, log_floor=-math.inf)


def delta_report(f: RationalFn) -> DeltaReport:
    dh = strip_widths(f)
    try:
        df = closed_form_decay(fourier_closed_form(f))
    except NotL1:
        df = (math.nan, math.nan)
    try:
        th = sector_angles(f)
    except ValueError:
        th = (math.nan, math.nan)
    dm = ec_strip_widths(f)
    return DeltaReport(dh, df, th, dm)
