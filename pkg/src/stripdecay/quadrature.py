"""Vectorized adaptive Gauss-Kronrod integration and oscillatory helpers.

Integrands are evaluated on whole batches of panels at once, which keeps
Python overhead low when thousands of half-period segments are needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_gauss_pos = [1, 3, 5, 7, 9, 11, 13]
WG = np.zeros(15)
WG[_gauss_pos] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    """Panel budget exhausted before the error target was met."""


class AccelerationError(RuntimeError):
    """Accelerated segment sums did not settle within the budget."""


def gk15(func: Callable, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod estimates and |K15 - G7| error bounds for panels ``[a_i, b_i]``."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = np.asarray(func(x.ravel()), dtype=complex).reshape(x.shape)
    k = h * (fx @ WK)
    g = h * (fx @ WG)
    return k, np.abs(k - g)


@dataclass
class PanelResult:
    values: np.ndarray  # one value per initial interval
    error: float
    panels: int

    @property
    def total(self) -> complex:
        return complex(np.sum(self.values))


def integrate_intervals(
    func: Callable,
    edges: Sequence[float],
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-10,
    max_panels: int = 20000,
) -> PanelResult:
    """Adaptive integration over consecutive intervals ``edges[i]..edges[i+1]``.

    Returns the integral of each initial interval separately, with the error
    target applied to their sum.
    """
    edges = np.asarray(edges, dtype=float)
    n0 = len(edges) - 1
    if n0 < 1:
        return PanelResult(np.zeros(0, dtype=complex), 0.0, 0)
    a, b = edges[:-1].copy(), edges[1:].copy()
    owner = np.arange(n0)
    val, err = gk15(func, a, b)
    evaluated = n0
    while True:
        total = np.sum(val)
        tol = max(abs_tol, rel_tol * abs(total))
        err_total = float(np.sum(err))
        if err_total <= tol:
            break
        # split panels carrying more than their share of the budget
        share = tol / len(a)
        split = err > share
        if not np.any(split):
            split[int(np.argmax(err))] = True
        n_split = int(np.count_nonzero(split))
        if len(a) + n_split > max_panels:
            raise QuadratureError(
                f"panel budget {max_panels} exhausted (error {err_total:.3e} > {tol:.3e})"
            )
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nowner = np.concatenate([owner[split], owner[split]])
        nval, nerr = gk15(func, na, nb)
        evaluated += len(na)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        owner = np.concatenate([owner[keep], nowner])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
    values = np.zeros(n0, dtype=complex)
    np.add.at(values, owner, val)
    return PanelResult(values, float(np.sum(err)), len(a))


def integrate(func: Callable, a: float, b: float, abs_tol=1e-10, rel_tol=1e-10, max_panels=20000,
              breakpoints: Sequence[float] = ()) -> complex:
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    return integrate_intervals(func, pts, abs_tol, rel_tol, max_panels).total


# ---------------------------------------------------------------------------
# phase geometry
# ---------------------------------------------------------------------------

def real_critical_points(phase: np.ndarray, imag_tol: float = 1e-9) -> np.ndarray:
    """Real zeros of the derivative of a real polynomial (ascending coefficients)."""
    d = np.polynomial.polynomial.polyder(phase)
    d = np.trim_zeros(d, "b")
    if len(d) <= 1:
        return np.zeros(0)
    z = np.polynomial.polynomial.polyroots(d)
    scale = max(1.0, float(np.max(np.abs(z)))) if len(z) else 1.0
    r = np.sort(z[np.abs(z.imag) < imag_tol * scale].real)
    return r


def _polyval(c: np.ndarray, x):
    return np.polynomial.polynomial.polyval(x, c)


def solve_monotone(phase: np.ndarray, lo: float, hi: float, targets: np.ndarray, iters: int = 80) -> np.ndarray:
    """Points in ``[lo, hi]`` where a monotone polynomial hits each target."""
    targets = np.asarray(targets, dtype=float)
    increasing = _polyval(phase, hi) >= _polyval(phase, lo)
    a = np.full(targets.shape, lo, dtype=float)
    b = np.full(targets.shape, hi, dtype=float)
    for _ in range(iters):
        m = 0.5 * (a + b)
        above = _polyval(phase, m) >= targets
        go_left = above if increasing else ~above
        b = np.where(go_left, m, b)
        a = np.where(go_left, a, m)
        if np.all(b - a <= 4e-16 * np.maximum(1.0, np.abs(m))):
            break
    return 0.5 * (a + b)


def level_crossings(phase: np.ndarray, lo: float, hi: float, step: float = math.pi) -> np.ndarray:
    """All points in ``(lo, hi)`` where the phase crosses a level ``phase(piece start) + k*step``.

    The interval is cut at critical points first so each piece is monotone.
    """
    cuts = [lo] + [c for c in real_critical_points(phase) if lo < c < hi] + [hi]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        pa, pb = _polyval(phase, a), _polyval(phase, b)
        n = int(math.floor(abs(pb - pa) / step))
        if n <= 0:
            continue
        sgn = 1.0 if pb > pa else -1.0
        targets = pa + sgn * step * np.arange(1, n + 1)
        pts = solve_monotone(phase, a, b, targets)
        out.append(pts[(pts > a) & (pts < b)])
    out.append(np.asarray(cuts[1:-1], dtype=float))
    if not out:
        return np.zeros(0)
    return np.unique(np.concatenate(out))


def tail_crossings(phase: np.ndarray, start: float, direction: int, count: int) -> np.ndarray:
    """First ``count`` level crossings beyond ``start`` moving in ``direction``.

    ``phase`` must be monotone on that half-line.
    """
    p0 = _polyval(phase, start)
    probe = start + direction * max(1.0, abs(start))
    sgn = 1.0 if _polyval(phase, probe) > p0 else -1.0
    targets = p0 + sgn * math.pi * np.arange(1, count + 1)
    far = probe
    while sgn * (_polyval(phase, far) - targets[-1]) < 0:
        far = start + 2.0 * (far - start)
        if abs(far) > 1e15:
            raise AccelerationError("phase does not grow along the tail")
    lo, hi = (start, far) if direction > 0 else (far, start)
    pts = solve_monotone(phase, lo, hi, targets)
    return pts


# ---------------------------------------------------------------------------
# acceleration of segment sums
# ---------------------------------------------------------------------------

def iterated_average(partial_sums: np.ndarray, levels: int = 8) -> tuple[complex, float]:
    """Repeated averaging of consecutive partial sums.

    Returns the final accelerated value and the gap between the last two
    values at the deepest level as an error estimate.
    """
    s = np.asarray(partial_sums, dtype=complex)
    if len(s) < levels + 2:
        raise ValueError("need more partial sums than averaging levels")
    for _ in range(levels):
        s = 0.5 * (s[:-1] + s[1:])
    return complex(s[-1]), float(abs(s[-1] - s[-2]))


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)
