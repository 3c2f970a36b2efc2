"""Finite truncated power-log expansions at a boundary point.

An expansion is a finite sum ``sum c * y**r * log(y)**s`` in a boundary
coordinate ``y`` together with a validity order: every term whose real
exponent is at least as dominant as ``order_valid_to`` is present.  At
``0+`` (and at infinity in standard coordinates ``y = 1/|t|``) smaller
``Re r`` dominates; at infinity in affine coordinates ``y = |t|`` larger
``Re r`` dominates.  At equal ``Re r`` the higher log power dominates.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .gaussian import GaussianRational
from .poly import CPoly, RationalFn

DEFAULT_TERMS = 12

Number = Union[GaussianRational, complex, int, Fraction]


class BoundaryKind(enum.Enum):
    ZERO_PLUS = "0+"
    FINITE = "finite"
    INFINITY = "infinity"


class Coords(enum.Enum):
    STANDARD = "standard"
    AFFINE = "affine"


class PoleAtPoint(ValueError):
    def __init__(self, order: int):
        super().__init__(f"pole of order {order} at the expansion point")
        self.order = order


@dataclass(frozen=True)
class Boundary:
    kind: BoundaryKind
    point: Number = 0
    side: int = 1
    coords: Coords = Coords.AFFINE

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        if self.kind is not BoundaryKind.INFINITY and self.coords is not Coords.AFFINE:
            # standard and affine coordinates coincide away from infinity
            object.__setattr__(self, "coords", Coords.AFFINE)

    @classmethod
    def zero_plus(cls) -> "Boundary":
        return cls(BoundaryKind.ZERO_PLUS)

    @classmethod
    def finite(cls, theta: Number, side: int = 1) -> "Boundary":
        return cls(BoundaryKind.FINITE, point=theta, side=side)

    @classmethod
    def infinity(cls, side: int = 1, coords: Coords = Coords.AFFINE) -> "Boundary":
        return cls(BoundaryKind.INFINITY, side=side, coords=coords)

    @property
    def y_to_infinity(self) -> bool:
        return self.kind is BoundaryKind.INFINITY and self.coords is Coords.AFFINE

    @property
    def direction(self) -> int:
        """+1 when smaller exponents dominate (y -> 0+), -1 when y -> +inf."""
        return -1 if self.y_to_infinity else 1

    def t_of_y(self, y):
        if self.kind is BoundaryKind.ZERO_PLUS:
            return y
        if self.kind is BoundaryKind.FINITE:
            return complex(self.point) + self.side * y
        if self.coords is Coords.AFFINE:
            return self.side * y
        return self.side / y

    def y_of_t(self, t):
        if self.kind is BoundaryKind.ZERO_PLUS:
            return t
        if self.kind is BoundaryKind.FINITE:
            return (t - complex(self.point)) * self.side
        if self.coords is Coords.AFFINE:
            return self.side * t
        return self.side / t

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "side": self.side, "coords": self.coords.value}
        if self.kind is BoundaryKind.FINITE:
            p = complex(self.point)
            out["point"] = [p.real, p.imag]
        return out


@dataclass(frozen=True)
class PowerLogMonomial:
    r: Number
    s: int = 0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("log power must be nonnegative")


@dataclass(frozen=True)
class Term:
    coeff: Number
    r: Number
    s: int = 0

    @property
    def re_r(self) -> float:
        return float(_re(self.r))

    @property
    def im_r(self) -> float:
        return float(_im(self.r))


def _re(x) -> Union[Fraction, float]:
    if isinstance(x, GaussianRational):
        return x.re
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return complex(x).real


def _im(x) -> Union[Fraction, float]:
    if isinstance(x, GaussianRational):
        return x.im
    if isinstance(x, (int, Fraction)):
        return Fraction(0)
    return complex(x).imag


def _norm_num(x):
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return GaussianRational(x)
    if isinstance(x, GaussianRational):
        return x
    return complex(x)


@dataclass(frozen=True)
class LeadingData:
    le1: float
    le2: int
    lc: tuple  # ((coefficient, imaginary exponent), ...)
    lm: PowerLogMonomial

    def to_json(self) -> dict:
        return {
            "LE1": self.le1,
            "LE2": self.le2,
            "LC": [{"coeff": [complex(c).real, complex(c).imag], "im_r": float(g)} for c, g in self.lc],
            "LM": {"r": float(_re(self.lm.r)), "s": self.lm.s},
        }


@dataclass(frozen=True)
class Expansion:
    boundary: Boundary
    terms: tuple = ()
    order_valid_to: float = math.inf
    _sorted: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self._sorted:
            return
        if math.isinf(self.order_valid_to):
            # infinite validity means "no truncation" whichever way exponents run
            object.__setattr__(self, "order_valid_to", self.boundary.direction * math.inf)
        merged: dict = {}
        for t in self.terms:
            if not isinstance(t, Term):
                t = Term(*t)
            key = (_norm_num(t.r), t.s)
            merged[key] = merged.get(key, GaussianRational(0)) + _norm_num(t.coeff)
        d = self.boundary.direction
        valid_d = d * self.order_valid_to
        kept = [
            Term(c, r, s)
            for (r, s), c in merged.items()
            if c != 0 and d * float(_re(r)) <= valid_d + 1e-12
        ]
        kept.sort(key=lambda t: (d * t.re_r, -t.s, t.im_r))
        object.__setattr__(self, "terms", tuple(kept))
        object.__setattr__(self, "_sorted", True)

    # ---------------------------------------------------------------
    @property
    def direction(self) -> int:
        return self.boundary.direction

    def is_zero(self) -> bool:
        return not self.terms

    def dominance_key(self, t: Term) -> tuple:
        return (self.direction * t.re_r, -t.s)

    def leading_exponent_d(self) -> float:
        if not self.terms:
            return self.direction * self.order_valid_to
        return self.direction * self.terms[0].re_r

    def __len__(self):
        return len(self.terms)

    def _with(self, terms, valid) -> "Expansion":
        return Expansion(self.boundary, tuple(terms), valid)

    def scale(self, c) -> "Expansion":
        return self._with([Term(c * t.coeff, t.r, t.s) for t in self.terms], self.order_valid_to)

    def __neg__(self):
        return self.scale(GaussianRational(-1))

    def _check_compatible(self, other: "Expansion"):
        if self.boundary != other.boundary:
            raise ValueError("expansions live at different boundaries or coordinates")

    def __add__(self, other: "Expansion") -> "Expansion":
        self._check_compatible(other)
        d = self.direction
        valid = d * min(d * self.order_valid_to, d * other.order_valid_to)
        return self._with(self.terms + other.terms, valid)

    def __sub__(self, other: "Expansion") -> "Expansion":
        return self + (-other)

    def __mul__(self, other: "Expansion") -> "Expansion":
        return multiply(self, other)

    def truncate(self, order: float) -> "Expansion":
        d = self.direction
        valid = d * min(d * order, d * self.order_valid_to)
        return self._with(self.terms, valid)

    def evaluate(self, y):
        """Partial sum at boundary coordinate ``y > 0``."""
        y = np.asarray(y, dtype=float)
        logy = np.log(y)
        out = np.zeros(y.shape, dtype=complex)
        for t in self.terms:
            out = out + complex(t.coeff) * np.exp(complex(t.r) * logy) * logy ** t.s
        return out if out.shape else complex(out)

    def evaluate_t(self, t):
        return self.evaluate(self.boundary.y_of_t(t))

    def to_json(self) -> dict:
        return {
            "boundary": self.boundary.to_json(),
            "order_valid_to": _json_float(self.order_valid_to),
            "terms": [
                {
                    "re_r": t.re_r,
                    "im_r": t.im_r,
                    "s": t.s,
                    "coeff_re": complex(t.coeff).real,
                    "coeff_im": complex(t.coeff).imag,
                }
                for t in self.terms
            ],
        }


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


# ---------------------------------------------------------------------------
# expansions of rational functions
# ---------------------------------------------------------------------------

def _series_div(num: Sequence, den: Sequence, count: int) -> list:
    """First ``count`` power-series coefficients of num/den with ``den[0] != 0``."""
    zero = GaussianRational(0)
    num = list(num) + [zero] * max(0, count - len(num))
    d0 = den[0]
    out = []
    for j in range(count):
        acc = num[j]
        for k in range(1, min(j, len(den) - 1) + 1):
            acc = acc - den[k] * out[j - k]
        out.append(acc / d0)
    return out


def _leading_zero_count(coeffs: Sequence, exact: bool) -> int:
    if exact:
        k = 0
        while k < len(coeffs) and coeffs[k] == 0:
            k += 1
        return k
    scale = max((abs(complex(c)) for c in coeffs), default=0.0)
    k = 0
    while k < len(coeffs) and abs(complex(coeffs[k])) <= 1e-13 * scale:
        k += 1
    return k


def _collect(coeff_stream, first_exp: int, n_terms: int, cap: int, sign: int):
    """Take up to ``n_terms`` nonzero coefficients; exponents ``first_exp + sign*j``."""
    terms = []
    last = first_exp
    for j, c in enumerate(coeff_stream[:cap]):
        last = first_exp + sign * j
        if c != 0:
            terms.append(Term(c, GaussianRational(last), 0))
            if len(terms) >= n_terms:
                break
    return terms, last


def expand_at(f: RationalFn, b: Boundary, n_terms: int = DEFAULT_TERMS) -> Expansion:
    """First ``n_terms`` nonzero terms of the Laurent/Taylor expansion of ``f`` at ``b``."""
    if f.is_zero():
        return Expansion(b, (), b.direction * math.inf)
    num, den = f.num, f.den
    exact = f.exact
    cap = (n_terms + 1) * (den.degree + 1) + num.degree + 4

    if b.kind is BoundaryKind.INFINITY:
        s = b.side
        dn, dd = num.degree, den.degree
        # f(s*Y) = Y^(dn-dd) * nt(u)/dt(u), u = 1/Y
        nt = [num.coeffs[dn - j] * (s ** (dn - j)) for j in range(dn + 1)]
        dt = [den.coeffs[dd - j] * (s ** (dd - j)) for j in range(dd + 1)]
        coeffs = _series_div(nt, dt, cap)
        if b.coords is Coords.AFFINE:
            terms, last = _collect(coeffs, dn - dd, n_terms, cap, -1)
        else:
            terms, last = _collect(coeffs, dd - dn, n_terms, cap, +1)
        return Expansion(b, tuple(terms), last)

    if b.kind is BoundaryKind.ZERO_PLUS:
        theta, s = 0, 1
    else:
        theta, s = b.point, b.side
    shifted_num = num.taylor_shift(theta) if theta != 0 else num
    shifted_den = den.taylor_shift(theta) if theta != 0 else den
    kn = _leading_zero_count(shifted_num.coeffs, exact)
    kd = _leading_zero_count(shifted_den.coeffs, exact)
    if b.kind is BoundaryKind.FINITE and kd > kn:
        raise PoleAtPoint(kd - kn)
    ncoef = [c * (s ** j) for j, c in enumerate(shifted_num.coeffs)][kn:]
    dcoef = [c * (s ** j) for j, c in enumerate(shifted_den.coeffs)][kd:]
    coeffs = _series_div(ncoef, dcoef, cap)
    terms, last = _collect(coeffs, kn - kd, n_terms, cap, +1)
    return Expansion(b, tuple(terms), last)


def leading_data(e: Expansion) -> LeadingData:
    if e.is_zero():
        raise ValueError("zero expansion has no leading data")
    first = e.terms[0]
    key = e.dominance_key(first)
    group = [t for t in e.terms if e.dominance_key(t) == key]
    lc = tuple((t.coeff, _im(t.r)) for t in group)
    return LeadingData(
        le1=first.re_r,
        le2=first.s,
        lc=lc,
        lm=PowerLogMonomial(_re(first.r), first.s),
    )


def differentiate(e: Expansion) -> Expansion:
    """Termwise ``d/dy`` of ``y**r log(y)**s``."""
    if e.boundary.kind is BoundaryKind.FINITE:
        raise ValueError("differentiate is defined at 0+ and at infinity only")
    out = []
    for t in e.terms:
        r1 = t.r - 1
        if t.r != 0:
            out.append(Term(t.r * t.coeff, r1, t.s))
        if t.s > 0:
            out.append(Term(t.s * t.coeff, r1, t.s - 1))
    return Expansion(e.boundary, tuple(out), e.order_valid_to - 1)


def multiply(a: Expansion, b: Expansion) -> Expansion:
    """Cauchy product truncated to the order both factors support."""
    a._check_compatible(b)
    d = a.direction
    va, vb = d * a.order_valid_to, d * b.order_valid_to
    la, lb = a.leading_exponent_d(), b.leading_exponent_d()
    valid_d = min(va + lb, vb + la)
    out = [Term(x.coeff * y.coeff, x.r + y.r, x.s + y.s) for x in a.terms for y in b.terms]
    return Expansion(a.boundary, tuple(out), d * valid_d)


def monomial_expansion(b: Boundary, coeff, r, s: int = 0) -> Expansion:
    """Exact single-term expansion (valid to all orders)."""
    return Expansion(b, (Term(coeff, r, s),), b.direction * math.inf)


def invert_monomial(e: Expansion) -> Expansion:
    if len(e.terms) != 1 or e.terms[0].s != 0 or not math.isinf(e.order_valid_to):
        raise ValueError("only exact single power terms can be inverted")
    t = e.terms[0]
    return monomial_expansion(e.boundary, GaussianRational(1) / t.coeff if not isinstance(t.coeff, complex) else 1 / t.coeff, -t.r)


def expand_expr(e, b: Boundary, n_terms: int = DEFAULT_TERMS) -> Expansion:
    """Expansion of a Rational or PowerLog expression tree."""
    from . import expr as ex

    cls = ex.classify(e)
    if cls is ex.FunctionClass.RATIONAL:
        return expand_at(ex.to_rational(e), b, n_terms)
    if cls is not ex.FunctionClass.POWER_LOG:
        raise ValueError(f"no power-log expansion for class {cls.value}")
    if not (b.kind is BoundaryKind.ZERO_PLUS or (b.kind is BoundaryKind.INFINITY and b.side == 1)):
        raise ValueError("power/log factors live on t > 0: expand at 0+ or +infinity")
    standard = b.kind is BoundaryKind.INFINITY and b.coords is Coords.STANDARD
    if isinstance(e, ex.TPow):
        return monomial_expansion(b, GaussianRational(1), -e.r if standard else e.r)
    if isinstance(e, ex.Log):
        return monomial_expansion(b, GaussianRational(-1 if standard else 1), GaussianRational(0), 1)
    if isinstance(e, ex.Neg):
        return -expand_expr(e.arg, b, n_terms)
    if isinstance(e, ex.Sum):
        return reduce(lambda x, y: x + y, (expand_expr(t, b, n_terms) for t in e.terms))
    if isinstance(e, ex.Prod):
        return reduce(multiply, (expand_expr(f, b, n_terms) for f in e.factors))
    if isinstance(e, ex.Quot):
        inv_den = expand_at(RationalFn.const(1) / ex.to_rational(e.den), b, n_terms)
        return multiply(expand_expr(e.num, b, n_terms), inv_den)
    if isinstance(e, ex.IntPow):
        base = expand_expr(e.base, b, n_terms)
        if e.n < 0:
            base = invert_monomial(base)
        out = monomial_expansion(b, GaussianRational(1), GaussianRational(0))
        for _ in range(abs(e.n)):
            out = multiply(out, base)
        return out
    raise ValueError(f"cannot expand {type(e).__name__}")


# ---------------------------------------------------------------------------
# noncompensation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscTerm:
    c: complex
    gamma: float
    phi: tuple = ()  # real coefficients of phi, ascending, phi(0) = 0


@dataclass(frozen=True)
class OscSum:
    """``E(y) = sum c_j y**(i gamma_j) exp(i phi_j(y**(-1/d)))``."""

    terms: tuple = ()
    d: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        keys = set()
        for t in self.terms:
            if t.phi and t.phi[0] != 0:
                raise ValueError("phase polynomials must vanish at 0")
            key = (float(t.gamma), tuple(float(x) for x in _trim(t.phi)))
            if key in keys:
                raise ValueError("(gamma, phi) pairs must be distinct")
            keys.add(key)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        logy = np.log(y)
        w = np.exp(-logy / self.d)
        out = np.zeros(y.shape, dtype=complex)
        for t in self.terms:
            ph = sum(float(a) * w ** k for k, a in enumerate(t.phi))
            out = out + complex(t.c) * np.exp(1j * (t.gamma * logy + ph))
        return out


def _trim(p: tuple) -> tuple:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


@dataclass(frozen=True)
class NoncompensationWitness:
    epsilon_hat: float
    witness_points: tuple
    level_maxima: tuple

    @property
    def weakest_level(self) -> float:
        """Smallest per-decade maximum: a bound that holds along the whole sequence."""
        return min(self.level_maxima, default=0.0)


def noncompensation_witness(
    E: OscSum, y_min: float = 1e-16, levels: int = 16, points_per_level: int = 64
) -> NoncompensationWitness:
    """Sample ``|E|`` on ``levels`` decades ending at ``y_min``.

    Each decade contributes its argmax sample as a witness point;
    ``epsilon_hat`` is the largest of the per-decade maxima.
    """
    if levels < 8:
        raise ValueError("need at least 8 levels")
    if not E.terms:
        return NoncompensationWitness(0.0, (), ())
    maxima, points = [], []
    for lev in range(levels):
        hi = y_min * 10.0 ** (levels - lev)
        ys = np.geomspace(hi, hi / 10.0, points_per_level, endpoint=False)
        vals = np.abs(E(ys))
        k = int(np.argmax(vals))
        maxima.append(float(vals[k]))
        points.append(float(ys[k]))
    return NoncompensationWitness(max(maxima), tuple(points), tuple(maxima))
