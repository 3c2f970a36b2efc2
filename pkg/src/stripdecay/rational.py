"""Pole data, integrability, strip widths, sector angles and rationality tests."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .gaussian import GaussianRational
from .poly import CPoly, RationalFn, roots, squarefree_decomposition

REAL_POLE_TOL = 1e-9
RANK_REL_TOL = 1e-8
REGEN_TOL = 1e-9
_EXACT_DENOM_LIMIT = 10 ** 6


@dataclass(frozen=True)
class Pole:
    location: complex
    order: int
    principal: tuple  # P^1 .. P^order (complex or GaussianRational)
    exact_location: Optional[GaussianRational] = None

    def __post_init__(self):
        if self.order != len(self.principal):
            raise ValueError("order must equal the number of principal coefficients")

    @property
    def is_real(self) -> bool:
        return abs(self.location.imag) < REAL_POLE_TOL

    def to_json(self) -> dict:
        return {
            "re": self.location.real,
            "im": self.location.imag,
            "order": self.order,
            "principal": [
                {"j": j, "re": complex(c).real, "im": complex(c).imag}
                for j, c in enumerate(self.principal, start=1)
            ],
        }


@dataclass(frozen=True)
class PartialFractions:
    poles: tuple
    polynomial_part: CPoly

    def __call__(self, z):
        out = self.polynomial_part(z)
        for p in self.poles:
            w = p.location
            for j, c in enumerate(p.principal, start=1):
                out = out + complex(c) / (z - w) ** j
        return out


def _exact_root(p: CPoly, z: complex) -> Optional[GaussianRational]:
    """Return ``z`` as an exact Gaussian rational if it is an exact root of ``p``."""
    cand = GaussianRational(
        Fraction(z.real).limit_denominator(_EXACT_DENOM_LIMIT),
        Fraction(z.imag).limit_denominator(_EXACT_DENOM_LIMIT),
    )
    return cand if p(cand) == 0 else None


def _pole_sites(den: CPoly) -> list:
    """``(float location, exact location or None, multiplicity)`` for each root."""
    if den.degree < 1:
        return []
    if not den.exact:
        return [(z, None, m) for z, m in roots(den)]
    sites = []
    for factor, mult in squarefree_decomposition(den):
        for z, _ in roots(factor):
            sites.append((z, _exact_root(factor, z), mult))
    sites.sort(key=lambda s: (round(s[0].real, 9), round(s[0].imag, 9)))
    return sites


def _taylor_head(num: CPoly, den: CPoly, at, count: int) -> list:
    """First ``count`` Taylor coefficients of num/den about ``at``."""
    a = num.taylor_shift(at).coeffs
    b = den.taylor_shift(at).coeffs
    zero = GaussianRational(0) if num.exact and den.exact else 0j
    a = list(a) + [zero] * max(0, count - len(a))
    out = []
    for j in range(count):
        acc = a[j]
        for k in range(1, min(j, len(b) - 1) + 1):
            acc = acc - b[k] * out[j - k]
        out.append(acc / b[0])
    return out


@lru_cache(maxsize=512)
def partial_fractions(f: RationalFn) -> PartialFractions:
    """Polynomial part plus principal parts ``P^j / (t - w)^j`` at every pole."""
    poly_part, rem = f.num.divmod(f.den)
    sites = _pole_sites(f.den)
    lead = f.den.leading
    poles = []
    for idx, (z, ze, mu) in enumerate(sites):
        if ze is not None:
            other = f.den
            for _ in range(mu):
                other = other // CPoly([-ze, 1])
            at = ze
            num = rem
        else:
            others = []
            for jdx, (z2, _, mu2) in enumerate(sites):
                if jdx != idx:
                    others.extend([z2] * mu2)
            other = CPoly.from_roots(others, complex(lead))
            at = z
            num = rem.to_float()
        head = _taylor_head(num, other, at, mu)
        principal = tuple(head[mu - j] for j in range(1, mu + 1))
        poles.append(Pole(complex(z if ze is None else complex(ze)), mu, principal, ze))
    return PartialFractions(tuple(poles), poly_part)


def poles(f: RationalFn) -> tuple:
    return partial_fractions(f).poles


def pole_table_json(f: RationalFn) -> list:
    return [p.to_json() for p in poles(f)]


# ---------------------------------------------------------------------------
# integrability and geometry of the pole set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegrabilityReport:
    L1_on_R: bool
    continuous_on_R: bool
    smooth_on_R: bool
    real_poles: tuple
    degree_gap: int

    def to_json(self) -> dict:
        return {
            "L1_on_R": self.L1_on_R,
            "continuous_on_R": self.continuous_on_R,
            "smooth_on_R": self.smooth_on_R,
            "real_poles": [p.to_json() for p in self.real_poles],
            "degree_gap": self.degree_gap,
        }


def classify_integrability(f: RationalFn) -> IntegrabilityReport:
    real = tuple(p for p in poles(f) if p.is_real)
    gap = f.degree_gap
    no_real = not real
    return IntegrabilityReport(
        L1_on_R=no_real and gap >= 2,
        continuous_on_R=no_real,
        smooth_on_R=no_real,
        real_poles=real,
        degree_gap=gap,
    )


def _abs_im(p: Pole) -> float:
    if p.exact_location is not None:
        return float(abs(p.exact_location.im))
    return abs(p.location.imag)


def strip_widths(f: RationalFn) -> tuple[float, float]:
    """``(delta_plus, delta_minus)``; ``(0, 0)`` when a pole sits on the real axis."""
    ps = poles(f)
    if any(p.is_real for p in ps):
        return 0.0, 0.0
    up = [_abs_im(p) for p in ps if p.location.imag > 0]
    down = [_abs_im(p) for p in ps if p.location.imag < 0]
    return (min(up) if up else math.inf, min(down) if down else math.inf)


def _arg(p: Pole) -> float:
    w = p.location
    if abs(w.imag) < REAL_POLE_TOL and w.real < 0:
        return math.pi
    if p.exact_location is not None:
        w = complex(p.exact_location)
    return cmath.phase(w)


def sector_angles(f: RationalFn) -> tuple[float, float]:
    """Half-angles of the pole-free sectors about the positive axis, per rotation sense."""
    ps = poles(f)
    if not ps:
        return math.inf, math.inf
    if any(p.is_real and p.location.real >= -REAL_POLE_TOL for p in ps):
        return 0.0, 0.0
    plus = minus = math.inf
    for p in ps:
        a = _arg(p)
        plus = min(plus, a if a > 0 else 2 * math.pi + a)
        b = -a
        minus = min(minus, b if b > 0 else 2 * math.pi + b)
    return plus, minus


@dataclass(frozen=True)
class EntireCheck:
    entire: bool
    polynomial: Optional[CPoly]


def entire_check(f: RationalFn) -> EntireCheck:
    if f.den.degree == 0:
        return EntireCheck(True, f.num)
    if f.exact:
        return EntireCheck(False, None)
    pf = partial_fractions(f)
    scale = max(1.0, max(abs(c) for c in f.num.coeffs) if f.num.coeffs else 1.0)
    if all(abs(complex(c)) <= 1e-9 * scale for p in pf.poles for c in p.principal):
        return EntireCheck(True, pf.polynomial_part)
    return EntireCheck(False, None)


# ---------------------------------------------------------------------------
# rationality from Taylor coefficients
# ---------------------------------------------------------------------------

class InsufficientCoefficients(ValueError):
    pass


@dataclass(frozen=True)
class RationalityResult:
    rational: bool
    reconstruction: Optional[RationalFn] = None
    rank: int = 0
    K: int = 0


def _is_exact_seq(coeffs: Sequence) -> bool:
    return all(GaussianRational.is_exact(c) for c in coeffs)


def _window_rows(coeffs: Sequence, K: int) -> list:
    n = len(coeffs)
    return [list(coeffs[j:j + K + 1]) for j in range(1, n - K)]


def _exact_nullspace(rows: list, ncols: int) -> tuple[int, list]:
    """Rank and one null vector (or empty list) by exact Gauss-Jordan elimination."""
    m = [[GaussianRational.coerce(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = GaussianRational(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    rank = len(pivots)
    if rank == ncols:
        return rank, []
    free = next(c for c in range(ncols) if c not in pivots)
    v = [GaussianRational(0)] * ncols
    v[free] = GaussianRational(1)
    for i, c in enumerate(pivots):
        v[c] = -m[i][free]
    return rank, v


def _float_nullspace(rows: list, ncols: int) -> tuple[int, list]:
    a = np.array(rows, dtype=complex).reshape(len(rows), ncols)
    s_max = np.linalg.norm(a, 2) if a.size else 0.0
    if s_max == 0.0:
        v = [0j] * ncols
        v[-1] = 1 + 0j
        return 0, v
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > RANK_REL_TOL * s[0]))
    if rank == ncols:
        return rank, []
    return rank, list(np.conj(vh[-1]))


def _reconstruct(coeffs: Sequence, v: list, exact: bool) -> Optional[RationalFn]:
    K = len(v) - 1
    q = list(reversed(v))  # q_0 .. q_K
    if (q[0] == 0) if exact else abs(q[0]) < 1e-12 * max(abs(x) for x in q):
        return None
    q0 = q[0]
    q = [x / q0 for x in q]
    p = [sum((q[j] * coeffs[k - j] for j in range(k + 1)), GaussianRational(0) if exact else 0j) for k in range(K + 1)]
    return RationalFn(CPoly(p), CPoly(q))


def taylor_coefficients(f: RationalFn, count: int) -> list:
    if f.den(0 if not f.exact else GaussianRational(0)) == 0:
        raise ValueError("function has a pole at 0")
    return _taylor_head(f.num, f.den, GaussianRational(0) if f.exact else 0j, count)


def _regenerates(g: RationalFn, coeffs: Sequence, exact: bool) -> bool:
    gen = taylor_coefficients(g, len(coeffs))
    if exact:
        return all(a == b for a, b in zip(gen, coeffs))
    scale = max(1.0, max(abs(complex(c)) for c in coeffs))
    return all(abs(complex(a) - complex(b)) <= REGEN_TOL * scale for a, b in zip(gen, coeffs))


def rationality_test(coeffs: Sequence, K: int) -> RationalityResult:
    """Decide whether ``coeffs`` are Taylor data of a quotient of degree <= K.

    The sliding windows ``(f_j, ..., f_{j+K})`` for ``j >= 1`` encode the
    recurrence ``sum_i q_i f_{k-i} = 0`` (``k > K``).  A rank-deficient window
    matrix whose null vector regenerates every supplied coefficient certifies
    rationality.  Exact inputs (ints, Fractions, Gaussian rationals) use exact
    elimination; anything else uses an SVD rank decision.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    if len(coeffs) < 2 * K + 2:
        raise InsufficientCoefficients(f"need at least {2 * K + 2} coefficients, got {len(coeffs)}")
    exact = _is_exact_seq(coeffs)
    if exact:
        coeffs = [GaussianRational.coerce(c) for c in coeffs]
        nullspace = _exact_nullspace
    else:
        coeffs = [complex(c) for c in coeffs]
        nullspace = _float_nullspace
    rank_k, vk = nullspace(_window_rows(coeffs, K), K + 1)
    if not vk:
        return RationalityResult(False, None, rank_k, K)
    # the smallest deficient order gives a one-dimensional null space with q_0 != 0
    for k2 in range(K + 1):
        _, v = (rank_k, vk) if k2 == K else nullspace(_window_rows(coeffs, k2), k2 + 1)
        if not v:
            continue
        g = _reconstruct(coeffs, v, exact)
        if g is not None and _regenerates(g, coeffs, exact):
            return RationalityResult(True, g, rank_k, K)
    return RationalityResult(False, None, rank_k, K)


def degree_bound(coeffs: Sequence, K_max: int) -> Optional[int]:
    """Smallest ``K <= K_max`` passing the rationality test, or ``None``."""
    if len(coeffs) < 2 * K_max + 2:
        raise InsufficientCoefficients(f"need at least {2 * K_max + 2} coefficients, got {len(coeffs)}")
    for K in range(K_max + 1):
        if rationality_test(coeffs, K).rational:
            return K
    return None
