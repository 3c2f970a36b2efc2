"""Quadrature-based Fourier transforms, improper oscillatory integrals and decay fits.

Every integrand is handled in the form ``a(t) * exp(i * Phi(t))`` with a
smooth amplitude ``a`` and a real polynomial total phase
``Phi(t) = P(t) - 2*pi*xi*t``.  A finite core interval containing all poles'
real parts and stationary points is integrated adaptively; beyond it the
phase is monotone and each tail is cut at the points where ``Phi`` advances
by ``pi``.  The resulting half-period sums alternate in sign and are summed
with iterated averaging.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .poly import RationalFn
from .quadrature import (
    AccelerationError,
    QuadratureError,
    integrate_intervals,
    iterated_average,
    level_crossings,
    real_critical_points,
    tail_crossings,
    gauss_legendre,
)
from .rational import classify_integrability, poles

TWO_PI = 2.0 * math.pi


class OscStrategy(enum.Enum):
    PHASE_PERIOD_SEGMENTS = "phase_period_segments"
    FIXED_PANELS = "fixed_panels"


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_panels: int = 20000
    osc_strategy: OscStrategy = OscStrategy.PHASE_PERIOD_SEGMENTS
    accel_levels: int = 8
    min_segments: int = 48
    max_segments: int = 4096

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_panels < 16:
            raise ValueError("max_panels must be at least 16")

    def to_json(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_panels": self.max_panels,
            "osc_strategy": self.osc_strategy.value,
            "accel_levels": self.accel_levels,
        }


class NotIntegrable(ValueError):
    """Input fails the integrability or convergence precondition."""


class UnsupportedClass(ValueError):
    pass


# ---------------------------------------------------------------------------
# integrand models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscIntegrand:
    """``h(t) = amp(t) * exp(i * P(t))`` on the real line.

    ``growth`` bounds the amplitude by ``C |t|**growth`` at both ends;
    ``features`` are real points (with a length scale) the core must contain.
    """

    amp: Callable
    phase: tuple = ()
    growth: float = 0.0
    features: tuple = ()  # (center, width) pairs
    label: str = ""

    def phase_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.phase] or [0.0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.amp(t) * np.exp(1j * np.polynomial.polynomial.polyval(t, self.phase_array()))


def _rational_integrand(f: RationalFn, phase: tuple, label: str = "") -> OscIntegrand:
    ff = f.to_float()
    feats = tuple((p.location.real, abs(p.location.imag)) for p in poles(f))
    growth = float(-f.degree_gap) if not f.is_zero() else -math.inf
    return OscIntegrand(ff, tuple(float(c) for c in phase), growth, feats, label)


def phase_components(e: ex.Expr) -> list[tuple[RationalFn, tuple]]:
    """Split a sum of rational-times-phase terms into (rational, phase) pairs."""
    cls = ex.classify(e)
    if cls in (ex.FunctionClass.RATIONAL, ex.FunctionClass.RATIONAL_PHASE):
        return [ex.rational_phase_parts(e)]
    if isinstance(e, ex.Sum):
        out = []
        for t in e.terms:
            out.extend(phase_components(t))
        return out
    if isinstance(e, ex.Neg):
        return [(-f, p) for f, p in phase_components(e.arg)]
    raise UnsupportedClass(
        f"class {cls.value} has no Fourier transform on the real line in this grammar"
    )


def integrands_of(e) -> list[OscIntegrand]:
    if isinstance(e, OscIntegrand):
        return [e]
    if isinstance(e, RationalFn):
        return [_rational_integrand(e, ())]
    if isinstance(e, str):
        e = ex.parse(e)
    comps = phase_components(e)
    merged: dict = {}
    for f, p in comps:
        key = tuple(float(c) for c in p)
        while key and key[-1] == 0.0:
            key = key[:-1]
        merged[key] = merged[key] + f if key in merged else f
    return [_rational_integrand(f, p) for p, f in merged.items() if not f.is_zero()]


# ---------------------------------------------------------------------------
# the Fourier integral engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannFTResult:
    value: complex
    segments_used: int
    acceleration_error_estimate: float

    def to_json(self) -> dict:
        return {
            "re": self.value.real,
            "im": self.value.imag,
            "segments_used": self.segments_used,
            "acceleration_error_estimate": self.acceleration_error_estimate,
        }


def _total_phase(h: OscIntegrand, xi: float) -> np.ndarray:
    p = h.phase_array().astype(float)
    p = np.concatenate([p, np.zeros(max(0, 2 - len(p)))])
    p[1] -= TWO_PI * xi
    return np.trim_zeros(p, "b") if np.any(p[1:] != 0) else p[:1]


def _core_half_width(h: OscIntegrand, phi: np.ndarray) -> float:
    T = 2.0
    for c, w in h.features:
        T = max(T, abs(c) + 3.0 * w + 1.0)
    crit = real_critical_points(phi)
    if len(crit):
        T = max(T, 1.25 * float(np.max(np.abs(crit))) + 2.0)
    return T


def _core_edges(h: OscIntegrand, phi: np.ndarray, lo: float, hi: float, cfg: QuadConfig) -> np.ndarray:
    pts = [lo, hi]
    pts += [c for c, _ in h.features if lo < c < hi]
    if cfg.osc_strategy is OscStrategy.PHASE_PERIOD_SEGMENTS and len(phi) > 1:
        pts += list(level_crossings(phi, lo, hi))
    else:
        pts += list(np.linspace(lo, hi, 17))
    return np.unique(np.asarray(pts, dtype=float))


def _integrand(h: OscIntegrand, phi: np.ndarray) -> Callable:
    amp = h.amp

    def g(t):
        return amp(t) * np.exp(1j * np.polynomial.polynomial.polyval(t, phi))

    return g


def _flat_tail(h: OscIntegrand, phi: np.ndarray, start: float, direction: int, cfg: QuadConfig) -> complex:
    """Non-oscillatory tail via ``t = start / u`` on ``(0, 1]``."""
    if h.growth >= -1:
        raise NotIntegrable("amplitude does not decay fast enough for an absolutely convergent tail")
    g = _integrand(h, phi)
    s = abs(start)

    def mapped(u):
        u = np.maximum(u, 1e-300)
        return g(direction * s / u) * s / (u * u)

    res = integrate_intervals(mapped, [0.0, 0.25, 0.5, 1.0], cfg.abs_tol / 10, cfg.rel_tol, cfg.max_panels)
    return res.total


def _osc_tail(h: OscIntegrand, phi: np.ndarray, start: float, direction: int, cfg: QuadConfig) -> tuple[complex, float, int]:
    """Accelerated sum of half-period segments on ``[start, direction*inf)``."""
    g = _integrand(h, phi)
    n = cfg.min_segments
    tol = max(cfg.abs_tol / 10, 0.0)
    while True:
        pts = tail_crossings(phi, start, direction, n)
        edges = np.concatenate([[start], pts])
        if direction < 0:
            edges = edges[::-1]
        res = integrate_intervals(g, edges, cfg.abs_tol / 20, cfg.rel_tol, cfg.max_panels)
        seg = res.values if direction > 0 else res.values[::-1]
        partial = np.cumsum(seg)
        value, err = iterated_average(partial, cfg.accel_levels)
        scale = max(tol, cfg.rel_tol * abs(value))
        if err <= scale:
            return value, err, n
        if n >= cfg.max_segments:
            raise AccelerationError(
                f"tail acceleration stalled: error estimate {err:.3e} after {n} segments"
            )
        n = min(2 * n, cfg.max_segments)


def _check_convergence(h: OscIntegrand, phi: np.ndarray) -> None:
    deg = len(phi) - 1
    if deg <= 0:
        if h.growth >= -1:
            raise NotIntegrable("no oscillation and amplitude not integrable")
        return
    # amplitude / phase' must tend to zero
    if not h.growth < deg - 1:
        raise NotIntegrable(
            f"amplitude growth {h.growth:g} too large for a phase of degree {deg}"
        )


def fourier_integral(h: OscIntegrand, xi: float, cfg: QuadConfig = QuadConfig()) -> RiemannFTResult:
    """``int h(t) exp(-i 2 pi xi t) dt`` as an improper Riemann integral."""
    phi = _total_phase(h, xi)
    _check_convergence(h, phi)
    T = _core_half_width(h, phi)
    edges = _core_edges(h, phi, -T, T, cfg)
    core = integrate_intervals(_integrand(h, phi), edges, cfg.abs_tol / 2, cfg.rel_tol, cfg.max_panels)
    total = core.total
    segs = len(edges) - 1
    err_est = 0.0
    for direction, start in ((1, T), (-1, -T)):
        if len(phi) <= 1:
            total += _flat_tail(h, phi, start, direction, cfg)
        else:
            v, e, n = _osc_tail(h, phi, start, direction, cfg)
            total += v
            err_est += e
            segs += n
    return RiemannFTResult(complex(total), segs, err_est)


def quad_ft(e, xi: float, cfg: QuadConfig = QuadConfig()) -> complex:
    """Fourier transform of an L1 function, ``int f(t) exp(-i 2 pi xi t) dt``.

    ``e`` may be an expression, an expression string, a ``RationalFn`` or an
    ``OscIntegrand`` built by the caller.
    """
    hs = integrands_of(e)
    for h in hs:
        if isinstance(h.amp, RationalFn):
            rep = classify_integrability(h.amp)
            if not rep.L1_on_R:
                raise NotIntegrable(
                    "not L1 on R: " + ("real pole" if rep.real_poles else f"degree gap {rep.degree_gap} < 2")
                )
        elif h.growth >= -1:
            raise NotIntegrable("caller-supplied amplitude is not L1")
    return complex(sum(fourier_integral(h, xi, cfg).value for h in hs))


def riemann_ft(e, xi: float, cfg: QuadConfig = QuadConfig()) -> RiemannFTResult:
    """Improper (Riemann) Fourier integral of rational-times-phase inputs."""
    hs = integrands_of(e)
    for h in hs:
        if isinstance(h.amp, RationalFn) and classify_integrability(h.amp).real_poles:
            raise NotIntegrable("real pole: the improper integral does not exist")
    results = [fourier_integral(h, xi, cfg) for h in hs]
    return RiemannFTResult(
        complex(sum(r.value for r in results)),
        sum(r.segments_used for r in results),
        float(sum(r.acceleration_error_estimate for r in results)),
    )


def quad_ft_grid(e, xis: Sequence[float], cfg: QuadConfig = QuadConfig()) -> np.ndarray:
    # fixed order keeps reports bit-reproducible
    return np.array([quad_ft(e, float(x), cfg) for x in xis], dtype=complex)


# ---------------------------------------------------------------------------
# antiderivatives
# ---------------------------------------------------------------------------

def _half_line_integral(h: OscIntegrand, x: float, direction: int, cfg: QuadConfig) -> RiemannFTResult:
    """``int_x^{direction*inf} h(t) dt`` (oriented along the direction of travel)."""
    phi = _total_phase(h, 0.0)
    _check_convergence(h, phi)
    T = max(_core_half_width(h, phi), abs(x) + 1.0)
    end = direction * T
    lo, hi = (x, end) if direction > 0 else (end, x)
    edges = _core_edges(h, phi, lo, hi, cfg)
    core = integrate_intervals(_integrand(h, phi), edges, cfg.abs_tol / 2, cfg.rel_tol, cfg.max_panels).total
    core = core if direction > 0 else -core
    if len(phi) <= 1:
        tail = _flat_tail(h, phi, end, direction, cfg)
        tail = tail if direction > 0 else -tail
        return RiemannFTResult(core + tail, len(edges) - 1, 0.0)
    v, err, n = _osc_tail(h, phi, end, direction, cfg)
    v = v if direction > 0 else -v
    return RiemannFTResult(core + v, len(edges) - 1 + n, err)


def antiderivative_tail_result(e, x: float, cfg: QuadConfig = QuadConfig()) -> RiemannFTResult:
    """``g(x) = -int_x^inf f(t) dt`` with its acceleration diagnostics."""
    hs = integrands_of(e)
    rs = [_half_line_integral(h, x, 1, cfg) for h in hs]
    return RiemannFTResult(
        -complex(sum(r.value for r in rs)),
        sum(r.segments_used for r in rs),
        float(sum(r.acceleration_error_estimate for r in rs)),
    )


def antiderivative_tail(e, x: float, cfg: QuadConfig = QuadConfig()) -> complex:
    return antiderivative_tail_result(e, x, cfg).value


def left_tail_integral(e, x: float, cfg: QuadConfig = QuadConfig()) -> RiemannFTResult:
    """``int_{-inf}^x f(t) dt``."""
    hs = integrands_of(e)
    rs = [_half_line_integral(h, x, -1, cfg) for h in hs]
    return RiemannFTResult(
        -complex(sum(r.value for r in rs)),
        sum(r.segments_used for r in rs),
        float(sum(r.acceleration_error_estimate for r in rs)),
    )


class TailAntiderivative:
    """Vectorized ``g(x) = -int_x^inf f`` for a rational-times-phase ``f``.

    ``g(0)`` comes from the accelerated tail; other values are obtained by
    integrating ``f`` outward from 0 over a table of short pieces (cut where
    the phase of ``f`` advances by ``pi``), then Gauss-Legendre from the
    nearest table point.
    """

    _GL_NODES, _GL_WEIGHTS = gauss_legendre(24)

    def __init__(self, e, cfg: QuadConfig = QuadConfig(), max_piece: float = 0.25):
        hs = integrands_of(e)
        if len(hs) != 1:
            raise UnsupportedClass("antiderivative table needs a single phase component")
        self.h = hs[0]
        self.cfg = cfg
        self.max_piece = max_piece
        self.anchor = antiderivative_tail(e, 0.0, cfg)
        self._phase = self.h.phase_array()
        self._f = _integrand(self.h, self._phase)
        self._reach = 0.0
        self._pts = np.array([0.0])
        self._vals = np.array([self.anchor], dtype=complex)

    def _breakpoints(self, lo: float, hi: float) -> np.ndarray:
        pts = [np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / self.max_piece)) + 1))]
        if len(self._phase) > 1:
            pts.append(level_crossings(self._phase, lo, hi))
        return np.unique(np.concatenate(pts))

    def _ensure(self, reach: float) -> None:
        if reach <= self._reach:
            return
        reach = max(reach, 2 * self._reach, 4.0)
        right = self._breakpoints(0.0, reach)
        left = -self._breakpoints(0.0, reach)[::-1]
        tol = self.cfg.abs_tol / 100
        rv = integrate_intervals(self._f, right, tol, self.cfg.rel_tol, 10 ** 7).values
        lv = integrate_intervals(self._f, left, tol, self.cfg.rel_tol, 10 ** 7).values
        right_vals = self.anchor + np.concatenate([[0], np.cumsum(rv)])
        left_vals = self.anchor - np.concatenate([np.cumsum(lv[::-1])[::-1], [0]])
        self._pts = np.concatenate([left[:-1], right])
        self._vals = np.concatenate([left_vals[:-1], right_vals])
        self._reach = reach

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        if flat.size == 0:
            return np.zeros(x.shape, dtype=complex)
        self._ensure(float(np.max(np.abs(flat))) + 1e-9)
        k = np.clip(np.searchsorted(self._pts, flat, side="right") - 1, 0, len(self._pts) - 1)
        base = self._pts[k]
        half = 0.5 * (flat - base)
        nodes = base[:, None] + half[:, None] * (1.0 + self._GL_NODES[None, :])
        piece = half * (self._f(nodes.ravel()).reshape(nodes.shape) @ self._GL_WEIGHTS)
        return (self._vals[k] + piece).reshape(x.shape)


def antiderivative_integrand(e, cfg: QuadConfig = QuadConfig()) -> OscIntegrand:
    """``g`` as an oscillatory integrand sharing the phase of ``f``.

    With ``f = a * exp(iP)`` and ``deg a - deg P <= -2`` the antiderivative
    behaves like ``a / (i P') * exp(iP)`` at infinity, so its amplitude
    decays by ``deg P - 1`` more powers.
    """
    g = TailAntiderivative(e, cfg)
    h = g.h
    phase = g._phase
    deg = len(phase) - 1
    if deg < 1:
        raise UnsupportedClass("antiderivative integrand needs a genuine phase")

    def amp(t):
        t = np.asarray(t, dtype=float)
        return g(t) * np.exp(-1j * np.polynomial.polynomial.polyval(t, phase))

    return OscIntegrand(amp, tuple(phase), h.growth - (deg - 1), h.features, "antiderivative")


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    rate: float
    power: float
    stderr: float
    r_squared: float
    window: tuple
    side: int
    n_points: int = 0
    log_c: float = 0.0

    def envelope(self, xi) -> np.ndarray:
        a = np.abs(np.asarray(xi, dtype=float))
        if math.isinf(self.rate):
            return np.zeros_like(a)
        return np.exp(self.log_c + self.power * np.log(a) - TWO_PI * self.rate * a)

    def to_json(self) -> dict:
        return {
            "rate": _finite_or_str(self.rate),
            "power": self.power,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "side": "+" if self.side > 0 else "-",
            "n_points": self.n_points,
        }


def _finite_or_str(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


class FitError(ValueError):
    pass


def envelope_points(xi: np.ndarray, mag: np.ndarray) -> np.ndarray:
    """Indices of local maxima; every index when the data have no interior minimum."""
    if len(mag) < 3:
        return np.arange(len(mag))
    mid = mag[1:-1]
    minima = (mid < mag[:-2]) & (mid < mag[2:])
    if not np.any(minima):
        return np.arange(len(mag))
    maxima = (mid >= mag[:-2]) & (mid >= mag[2:])
    return np.nonzero(maxima)[0] + 1


def decay_fit(samples: Sequence, side: int, floor: float = 1e-14, min_xi: float = 1.0) -> DecayFit:
    """Fit ``|F(xi)| ~ C |xi|**m exp(-2 pi rate |xi|)`` on one side.

    ``side = +1`` studies ``xi -> -inf`` (the half-plane Im > 0 controls it),
    ``side = -1`` studies ``xi -> +inf``.
    """
    xs = np.array([float(s[0]) for s in samples])
    mags = np.abs(np.array([complex(s[1]) for s in samples]))
    with np.errstate(divide="ignore"):
        logs = np.log(mags)
    log_floor = math.log(floor) if floor > 0 else -math.inf
    return decay_fit_log(xs, logs, side, log_floor=log_floor, min_xi=min_xi)


def decay_fit_log(xi, log_abs, side: int, log_floor: float = math.log(1e-14),
                  min_xi: float = 1.0) -> DecayFit:
    """Same fit as :func:`decay_fit` from samples of ``log|F|``.

    Useful when the magnitudes themselves would underflow a double.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    xs = np.asarray(xi, dtype=float)
    ls = np.asarray(log_abs, dtype=float)
    mask = (-side * xs) >= min_xi
    xs, ls = np.abs(xs[mask]), ls[mask]
    order = np.argsort(xs)
    xs, ls = xs[order], ls[order]
    if len(xs) < 24:
        raise FitError(f"need at least 24 samples on the side, got {len(xs)}")
    if xs[-1] < 4 * xs[0]:
        raise FitError("samples must span at least a factor of 4 in |xi|")
    window = (float(xs[0]), float(xs[-1]))
    keep = (ls >= log_floor) & np.isfinite(ls)
    if not np.any(keep):
        return DecayFit(math.inf, 0.0, 0.0, 1.0, window, side, 0)
    xs, ls = xs[keep], ls[keep]
    idx = envelope_points(xs, ls)
    if len(idx) < 6:
        raise FitError(f"only {len(idx)} envelope maxima (need 6)")
    x, y = xs[idx], ls[idx]
    A = np.column_stack([np.ones_like(x), np.log(x), -TWO_PI * x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    dof = max(1, len(x) - 3)
    cov = (rss / dof) * np.linalg.pinv(A.T @ A)
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return DecayFit(
        rate=float(coef[2]),
        power=float(coef[1]),
        stderr=float(math.sqrt(max(cov[2, 2], 0.0))),
        r_squared=float(r2),
        window=(float(x[0]), float(x[-1])),
        side=side,
        n_points=int(len(x)),
        log_c=float(coef[0]),
    )


def samples_csv(xi: Sequence[float], values: Sequence[complex]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xi", "re", "im", "abs"])
    for x, v in zip(xi, values):
        v = complex(v)
        w.writerow([repr(float(x)), repr(v.real), repr(v.imag), repr(abs(v))])
    return buf.getvalue()


def write_samples_csv(path, xi: Sequence[float], values: Sequence[complex]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(samples_csv(xi, values))
