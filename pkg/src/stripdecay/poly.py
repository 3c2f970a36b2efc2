"""Complex polynomials, rational functions, and an all-roots solver.

Coefficients are either exact (``GaussianRational``) or ``complex``.  A
polynomial is exact only when every coefficient is; any float contaminates
the whole object, and the exact-only operations (``gcd``, square-free
factorisation) then refuse to run.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .gaussian import GaussianRational

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 200


class RootFindingError(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(f"{message} (best relative residual {best_residual:.3e})")
        self.best_residual = best_residual


def _normalize_coeff(c):
    if isinstance(c, GaussianRational):
        return c
    if isinstance(c, (int, Fraction)) and not isinstance(c, bool):
        return GaussianRational(c)
    return complex(c)


def _is_zero(c) -> bool:
    return c == 0


class CPoly:
    """Polynomial with ascending coefficients ``c[0] + c[1] t + ...``."""

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs: Iterable = ()):
        cs = [_normalize_coeff(c) for c in coeffs]
        while cs and _is_zero(cs[-1]):
            cs.pop()
        exact = all(isinstance(c, GaussianRational) for c in cs)
        if not exact:
            cs = [complex(c) for c in cs]
        self.coeffs: tuple = tuple(cs)
        self.exact: bool = exact

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "CPoly":
        return cls([c])

    @classmethod
    def t(cls) -> "CPoly":
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Sequence, lead=1) -> "CPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    # basic properties -----------------------------------------------------
    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading(self):
        if not self.coeffs:
            return GaussianRational(0)
        return self.coeffs[-1]

    def to_numpy(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=complex)

    def to_float(self) -> "CPoly":
        return CPoly([complex(c) for c in self.coeffs]) if self.exact else self

    def __repr__(self):
        return f"CPoly({list(self.coeffs)!r})"

    def __eq__(self, other):
        if not isinstance(other, CPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _lift(other) -> "CPoly":
        return other if isinstance(other, CPoly) else CPoly([other])

    def __add__(self, other):
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        zero = GaussianRational(0)
        a = list(self.coeffs) + [zero] * (n - len(self.coeffs))
        b = list(o.coeffs) + [zero] * (n - len(o.coeffs))
        return CPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return CPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        if self.is_zero() or o.is_zero():
            return CPoly()
        out = [GaussianRational(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if _is_zero(a):
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return CPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = CPoly([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "CPoly":
        return CPoly([c * x for x in self.coeffs])

    def divmod(self, other: "CPoly") -> tuple["CPoly", "CPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.leading
        if len(rem) - 1 < dq:
            return CPoly(), CPoly(rem)
        quot = [GaussianRational(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] / lead
            quot[k] = c
            if _is_zero(c):
                continue
            for j, b in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - c * b
        return CPoly(quot), CPoly(rem[:dq])

    def __floordiv__(self, other):
        return self.divmod(self._lift(other))[0]

    def __mod__(self, other):
        return self.divmod(self._lift(other))[1]

    def monic(self) -> "CPoly":
        if self.is_zero():
            return self
        lead = self.leading
        return CPoly([c / lead for c in self.coeffs])

    def derivative(self) -> "CPoly":
        return CPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def taylor_shift(self, a) -> "CPoly":
        """Coefficients of ``p(a + s)`` in powers of ``s``."""
        out = list(self.coeffs)
        n = len(out)
        # repeated synthetic division
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                out[k] = out[k] + a * out[k + 1]
        return CPoly(out)

    def __call__(self, z):
        """Horner evaluation; accepts scalars or numpy arrays."""
        if not self.coeffs:
            return np.zeros_like(z, dtype=complex) if isinstance(z, np.ndarray) else 0j
        if isinstance(z, np.ndarray):
            cs = [complex(c) for c in self.coeffs]
            acc = np.full(z.shape, cs[-1], dtype=complex)
            for c in reversed(cs[:-1]):
                acc = acc * z + c
            return acc
        if self.exact and GaussianRational.is_exact(z):
            acc = self.coeffs[-1]
            for c in reversed(self.coeffs[:-1]):
                acc = acc * z + c
            return acc
        acc = complex(self.coeffs[-1])
        z = complex(z)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + complex(c)
        return acc

    def abs_coeff_poly(self, r: float) -> float:
        """``sum |c_k| r^k``: the scale for relative residuals."""
        return float(sum(abs(complex(c)) * r ** k for k, c in enumerate(self.coeffs)))


def poly_gcd(a: CPoly, b: CPoly) -> CPoly:
    """Monic gcd over Q(i); exact inputs only."""
    if not (a.exact and b.exact):
        raise ValueError("gcd requires exact polynomials")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def squarefree_decomposition(p: CPoly) -> list[tuple[CPoly, int]]:
    """Yun's algorithm: ``p = lc * prod(a_k ** k)`` with squarefree coprime ``a_k``."""
    if not p.exact:
        raise ValueError("square-free decomposition requires an exact polynomial")
    if p.degree < 1:
        return []
    dp = p.derivative()
    a0 = poly_gcd(p, dp)
    b = p // a0
    c = dp // a0
    d = c - b.derivative()
    out = []
    k = 1
    while b.degree >= 1:
        a = poly_gcd(b, d)
        if a.degree >= 1:
            out.append((a.monic(), k))
        b = b // a
        c = d // a
        d = c - b.derivative()
        k += 1
    return out


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def _aberth(coeffs: np.ndarray, z: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float]:
    """Aberth-Ehrlich refinement of all roots at once."""
    p = np.polynomial.Polynomial(coeffs)
    dp = p.deriv()
    absc = np.abs(coeffs)
    n = len(z)

    def residuals(z):
        scale = np.polynomial.polynomial.polyval(np.abs(z), absc)
        return np.abs(p(z)) / np.where(scale > 0, scale, 1.0)

    res = residuals(z)
    for _ in range(max_iter):
        if np.all(res <= tol):
            break
        pz = p(z)
        dpz = dp(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        active = res > tol
        z = np.where(active, z - w, z)
        new_res = residuals(z)
        if n and np.all(np.abs(w[active]) <= 1e-17 * np.maximum(1.0, np.abs(z[active]))):
            res = new_res
            break
        res = new_res
    return z, float(res.max(initial=0.0))


def _initial_roots(coeffs: np.ndarray) -> np.ndarray:
    # companion-matrix eigenvalues; numpy.roots wants descending order
    return np.roots(coeffs[::-1]).astype(complex)


def _simple_roots(p: CPoly, tol: float, max_iter: int) -> np.ndarray:
    coeffs = p.to_numpy()
    if p.degree == 1:
        return np.array([-coeffs[0] / coeffs[1]])
    z0 = _initial_roots(coeffs)
    z, best = _aberth(coeffs, z0, tol, max_iter)
    if best > max(tol, 1e-10) and best > 1e-8:
        raise RootFindingError("root refinement did not converge", best)
    return z


def _cluster(z: list, tol: float) -> list[tuple[complex, int]]:
    # largest m whose m nearest points sit within 10*tol**(1/m) of their centroid
    remaining = list(z)
    out = []
    while remaining:
        seed = remaining.pop(0)
        remaining.sort(key=lambda r: abs(r - seed))
        take = 0
        for m in range(len(remaining) + 1, 1, -1):
            members = [seed] + remaining[: m - 1]
            centre = np.mean(members)
            if max(abs(r - centre) for r in members) <= 10.0 * tol ** (1.0 / m):
                take = m - 1
                break
        members = [seed] + remaining[:take]
        del remaining[:take]
        out.append((complex(np.mean(members)), len(members)))
    return out


def _polish_multiple(p: CPoly, z: complex, mu: int, steps: int = 3) -> complex:
    if mu == 1:
        return z
    q = p.to_float()
    for _ in range(mu - 1):
        q = q.derivative()
    dq = q.derivative()
    for _ in range(steps):
        d = dq(z)
        if d == 0:
            break
        step = q(z) / d
        if not np.isfinite(step):
            break
        z = z - step
    return complex(z)


def roots(p: CPoly, tol: float = ROOT_TOL, max_iter: int = ROOT_MAX_ITER) -> list[tuple[complex, int]]:
    """All roots of ``p`` with multiplicities, sorted by (Re, Im).

    Exact polynomials are split into square-free factors first, so
    multiplicities are certified.  Float polynomials rely on clustering
    with radius ``10 * tol ** (1/mu)``.
    """
    if p.degree < 1:
        raise ValueError("roots() needs a polynomial of degree >= 1")
    if not (0 < tol <= 1e-6):
        raise ValueError("tol must lie in (0, 1e-6]")
    found: list[tuple[complex, int]] = []
    if p.exact:
        for factor, mult in squarefree_decomposition(p):
            for z in _simple_roots(factor, tol, max_iter):
                found.append((complex(z), mult))
    else:
        z = _simple_roots(p, tol, max_iter)
        for loc, mult in _cluster(list(z), tol):
            found.append((_polish_multiple(p, loc, mult), mult))
    found.sort(key=lambda r: (round(r[0].real, 9), round(r[0].imag, 9)))
    return found


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RationalFn:
    """Quotient ``num/den``; reduced with a monic denominator when exact."""

    num: CPoly
    den: CPoly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num, den = self.num, self.den
        if num.is_zero():
            num, den = CPoly(), CPoly([1])
        elif num.exact and den.exact:
            g = poly_gcd(num, den)
            if g.degree >= 1:
                num, den = num // g, den // g
        lead = den.leading
        num, den = CPoly([c / lead for c in num.coeffs]), CPoly([c / lead for c in den.coeffs])
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_poly(cls, p: CPoly) -> "RationalFn":
        return cls(p, CPoly([1]))

    @classmethod
    def const(cls, c) -> "RationalFn":
        return cls(CPoly([c]), CPoly([1]))

    @classmethod
    def t(cls) -> "RationalFn":
        return cls(CPoly.t(), CPoly([1]))

    @property
    def exact(self) -> bool:
        return self.num.exact and self.den.exact

    @property
    def degree_gap(self) -> int:
        """``deg den - deg num``; large sentinel for the zero function."""
        if self.num.is_zero():
            return 10 ** 9
        return self.den.degree - self.num.degree

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __repr__(self):
        return f"RationalFn(num={list(self.num.coeffs)!r}, den={list(self.den.coeffs)!r})"

    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    @staticmethod
    def _lift(o) -> "RationalFn":
        if isinstance(o, RationalFn):
            return o
        if isinstance(o, CPoly):
            return RationalFn.from_poly(o)
        return RationalFn.const(o)

    def __add__(self, other):
        o = self._lift(other)
        return RationalFn(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RationalFn(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.is_zero():
            raise ZeroDivisionError("rational division by zero")
        return RationalFn(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n: int):
        if n >= 0:
            return RationalFn(self.num ** n, self.den ** n)
        return RationalFn(self.den ** (-n), self.num ** (-n))

    def derivative(self) -> "RationalFn":
        return RationalFn(self.num.derivative() * self.den - self.num * self.den.derivative(), self.den * self.den)

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def to_float(self) -> "RationalFn":
        return RationalFn(self.num.to_float(), self.den.to_float())


def poly_str(p: CPoly, var: str = "t") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        cs = str(c) if isinstance(c, GaussianRational) else repr(complex(c))
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        parts.append(cs if not mono else (mono if cs == "1" else f"({cs})*{mono}"))
    return " + ".join(parts)


def is_real_poly(p: CPoly) -> bool:
    return all(complex(c).imag == 0 for c in p.coeffs)


__all__ = [
    "CPoly",
    "RationalFn",
    "RootFindingError",
    "roots",
    "poly_gcd",
    "squarefree_decomposition",
    "poly_str",
    "is_real_poly",
]
