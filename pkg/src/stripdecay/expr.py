"""Restricted one-variable expression language.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``; juxtaposition is not multiplication)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "t" | "i" | "(" expr ")"
            | "exp" "(" expr ")" | "log" "(" expr ")"

Semantic restrictions enforced while building the tree:

* exponents are constant; a non-integer exponent is only allowed on the bare
  variable (``t^(1/2)``, domain ``t > 0``);
* ``log`` only applies to the bare variable;
* ``exp(X)`` requires ``X = i*P(t)`` with ``P`` a real polynomial;
* denominators are nonzero polynomials in ``t``.

Constant subtrees are folded into exact ``Const`` nodes over Q(i).
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Union

import numpy as np

from .gaussian import GaussianRational, format_exact
from .poly import CPoly, RationalFn, roots

POLE_TOL = 1e-12
REAL_AXIS_TOL = 1e-9


class ParseError(ValueError):
    """Malformed input; ``offset`` is a UTF-8 byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.reason = message


class UnsupportedConstruct(ParseError):
    pass


class DomainError(ValueError):
    pass


class PoleError(ArithmeticError):
    pass


class NotContinuable(ValueError):
    """The expression's class has no analytic continuation in this library."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

Span = tuple[int, int]


@dataclass(frozen=True)
class Node:
    span: Span = field(default=(0, 0), compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Const(Node):
    value: GaussianRational


@dataclass(frozen=True)
class Var(Node):
    pass


@dataclass(frozen=True)
class Sum(Node):
    terms: tuple


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Prod(Node):
    factors: tuple


@dataclass(frozen=True)
class Quot(Node):
    num: Node
    den: Node

    @cached_property
    def den_poly(self) -> CPoly:
        return polynomial_of(self.den)


@dataclass(frozen=True)
class IntPow(Node):
    base: Node
    n: int


@dataclass(frozen=True)
class TPow(Node):
    """``t**r`` on ``t > 0`` for a non-integer exponent ``r``."""

    r: Union[GaussianRational, complex]


@dataclass(frozen=True)
class Log(Node):
    pass


@dataclass(frozen=True)
class Phase(Node):
    """``exp(i*P(t))``; ``poly`` holds the real coefficients of ``P``, ascending."""

    poly: tuple


Expr = Node


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        for kind in ("num", "id", "op"):
            if m.group(kind) is not None:
                toks.append(_Tok(kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def err(self, msg: str, pos: int | None = None, cls=ParseError):
        return cls(msg, _byte_offset(self.text, self.tok.pos if pos is None else pos))

    def accept(self, kind: str, text: str | None = None) -> _Tok | None:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.k += 1
            return t
        return None

    def expect(self, kind: str, text: str) -> _Tok:
        t = self.accept(kind, text)
        if t is None:
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.err(f"expected {text!r}, found {found}")
        return t

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.err(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        start = self.tok.pos
        terms = [self.term()]
        while True:
            if self.accept("op", "+"):
                terms.append(self.term())
            elif self.accept("op", "-"):
                t = self.term()
                terms.append(_fold(Neg(t, span=t.span)))
            else:
                break
        if len(terms) == 1:
            return terms[0]
        flat = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, Sum) else (t,))
        return _fold(Sum(tuple(flat), span=(start, self.tok.pos)))

    def term(self) -> Node:
        start = self.tok.pos
        acc = self.unary()
        while True:
            op = self.accept("op", "*") or self.accept("op", "/")
            if op is None:
                return acc
            rhs = self.unary()
            span = (start, self.tok.pos)
            if op.text == "*":
                left = acc.factors if isinstance(acc, Prod) else (acc,)
                right = rhs.factors if isinstance(rhs, Prod) else (rhs,)
                acc = _fold(Prod(left + right, span=span))
            else:
                if not _is_polynomial(rhs):
                    raise self.err("denominator must be a polynomial in t", op.pos, UnsupportedConstruct)
                if polynomial_of(rhs).is_zero():
                    raise self.err("division by zero", op.pos)
                acc = _fold(Quot(acc, rhs, span=span))

    def unary(self) -> Node:
        t = self.tok
        if self.accept("op", "-"):
            arg = self.unary()
            return _fold(Neg(arg, span=(t.pos, self.tok.pos)))
        if self.accept("op", "+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        start = self.tok.pos
        base = self.atom()
        caret = self.accept("op", "^")
        if caret is None:
            return base
        exp_node = self.unary()
        if not isinstance(exp_node, Const):
            raise self.err("exponent must be a constant", caret.pos, UnsupportedConstruct)
        r = exp_node.value
        span = (start, self.tok.pos)
        if r.im == 0 and r.re.denominator == 1:
            return _fold(IntPow(base, int(r.re), span=span))
        if not isinstance(base, Var):
            raise self.err("non-integer powers apply only to the variable t", caret.pos, UnsupportedConstruct)
        return TPow(r, span=span)

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.k += 1
            return Const(GaussianRational(Fraction(t.text)), span=(t.pos, t.pos + len(t.text)))
        if t.kind == "id":
            self.k += 1
            span = (t.pos, t.pos + len(t.text))
            if t.text == "t":
                return Var(span=span)
            if t.text == "i":
                return Const(GaussianRational(0, 1), span=span)
            if t.text in ("exp", "log"):
                self.expect("op", "(")
                arg = self.expr()
                self.expect("op", ")")
                span = (t.pos, self.toks[self.k - 1].pos + 1)
                return self._function(t, arg, span)
            raise self.err(f"unknown identifier {t.text!r}", t.pos, UnsupportedConstruct)
        if self.accept("op", "("):
            node = self.expr()
            self.expect("op", ")")
            return node
        if t.kind == "end":
            raise self.err("unexpected end of input")
        raise self.err(f"unexpected {t.text!r}")

    def _function(self, tok: _Tok, arg: Node, span: Span) -> Node:
        if tok.text == "log":
            if not isinstance(arg, Var):
                raise self.err("log applies only to the variable t", tok.pos, UnsupportedConstruct)
            return Log(span=span)
        if not _is_polynomial(arg):
            raise self.err("exp argument must be i times a real polynomial in t", tok.pos, UnsupportedConstruct)
        p = polynomial_of(arg)
        if any(GaussianRational.coerce(c).re != 0 for c in p.coeffs):
            raise self.err("exp argument must be i times a real polynomial in t", tok.pos, UnsupportedConstruct)
        coeffs = tuple(GaussianRational.coerce(c).im for c in p.coeffs)
        if not coeffs:
            return Const(GaussianRational(1), span=span)
        return Phase(coeffs, span=span)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# structural helpers
# ---------------------------------------------------------------------------

def children(e: Node) -> tuple:
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Prod):
        return e.factors
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, Quot):
        return (e.num, e.den)
    if isinstance(e, IntPow):
        return (e.base,)
    return ()


def contains_var(e: Node) -> bool:
    if isinstance(e, (Var, TPow, Log, Phase)):
        return True
    return any(contains_var(c) for c in children(e))


def _is_polynomial(e: Node) -> bool:
    if isinstance(e, (Const, Var)):
        return True
    if isinstance(e, (Sum, Prod, Neg)):
        return all(_is_polynomial(c) for c in children(e))
    if isinstance(e, IntPow):
        return e.n >= 0 and _is_polynomial(e.base)
    if isinstance(e, Quot):
        return _is_polynomial(e.num) and not contains_var(e.den)
    return False


def polynomial_of(e: Node) -> CPoly:
    """Exact polynomial for a polynomial-valued subtree."""
    if isinstance(e, Const):
        return CPoly([e.value])
    if isinstance(e, Var):
        return CPoly.t()
    if isinstance(e, Sum):
        return reduce(lambda a, b: a + b, (polynomial_of(c) for c in e.terms), CPoly())
    if isinstance(e, Prod):
        return reduce(lambda a, b: a * b, (polynomial_of(c) for c in e.factors), CPoly([1]))
    if isinstance(e, Neg):
        return -polynomial_of(e.arg)
    if isinstance(e, IntPow) and e.n >= 0:
        return polynomial_of(e.base) ** e.n
    if isinstance(e, Quot) and not contains_var(e.den):
        return polynomial_of(e.num).scale(GaussianRational(1) / _const_value(e.den))
    raise UnsupportedConstruct("not a polynomial", e.span[0])


def _const_value(e: Node) -> GaussianRational:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Sum):
        return reduce(lambda a, b: a + b, (_const_value(c) for c in e.terms), GaussianRational(0))
    if isinstance(e, Prod):
        return reduce(lambda a, b: a * b, (_const_value(c) for c in e.factors), GaussianRational(1))
    if isinstance(e, Neg):
        return -_const_value(e.arg)
    if isinstance(e, Quot):
        return _const_value(e.num) / _const_value(e.den)
    if isinstance(e, IntPow):
        return _const_value(e.base) ** e.n
    raise TypeError("not a constant subtree")


def _fold(e: Node) -> Node:
    """Collapse constant subtrees into a single exact ``Const``."""
    if isinstance(e, Const) or contains_var(e):
        return e
    try:
        return Const(_const_value(e), span=e.span)
    except ZeroDivisionError:
        raise ParseError("division by zero", e.span[0]) from None


# ---------------------------------------------------------------------------
# printer
# ---------------------------------------------------------------------------

_SUM, _PROD, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _const_text(v: GaussianRational) -> tuple[str, int]:
    s = format_exact(v)
    if v.im != 0 and v.re != 0:
        return s, _SUM
    if s.startswith("-"):
        return s, _UNARY
    if "/" in s or "*" in s:
        return s, _PROD
    return s, _ATOM


def _exponent_text(r) -> str:
    if isinstance(r, GaussianRational):
        s, prec = _const_text(r)
        return s if prec >= _ATOM else f"({s})"
    r = complex(r)
    if r.imag == 0:
        return f"({r.real!r})"
    sign = "+" if r.imag >= 0 else "-"
    return f"({r.real!r}{sign}{abs(r.imag)!r}*i)"


def _poly_expr_text(coeffs: tuple) -> str:
    parts = []
    for k, c in enumerate(coeffs):
        c = Fraction(c)
        if c == 0:
            continue
        mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{format_exact(GaussianRational(mag))}*{mono}"
        else:
            body = format_exact(GaussianRational(mag))
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts) if parts else "0"


def _render(e: Node) -> tuple[str, int]:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return "t", _ATOM
    if isinstance(e, Log):
        return "log(t)", _ATOM
    if isinstance(e, Phase):
        body = _poly_expr_text(e.poly)
        if " " in body:
            body = f"({body})"
        return f"exp(i*{body})", _ATOM
    if isinstance(e, TPow):
        return f"t^{_exponent_text(e.r)}", _POW
    if isinstance(e, IntPow):
        return f"{_wrap(e.base, _ATOM)}^{e.n}", _POW
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, _UNARY)}", _UNARY
    if isinstance(e, Quot):
        return f"{_wrap(e.num, _PROD)}/{_wrap(e.den, _UNARY)}", _PROD
    if isinstance(e, Prod):
        head = _wrap(e.factors[0], _PROD)
        tail = [_wrap(f, _UNARY) for f in e.factors[1:]]
        return "*".join([head] + tail), _PROD
    if isinstance(e, Sum):
        # a compound constant such as 1+i would merge into the surrounding sum
        out = [_wrap(e.terms[0], _PROD if isinstance(e.terms[0], Const) else _SUM)]
        for term in e.terms[1:]:
            if isinstance(term, Neg):
                out.append(" - " + _wrap(term.arg, _PROD))
            elif isinstance(term, Const) and _const_text(term.value)[1] == _UNARY:
                out.append(" - " + _wrap(Const(-term.value), _PROD))
            else:
                out.append(" + " + _wrap(term, _PROD))
        return "".join(out), _SUM
    raise TypeError(f"unknown node {type(e).__name__}")


def _wrap(e: Node, min_prec: int) -> str:
    s, prec = _render(e)
    return s if prec >= min_prec else f"({s})"


def to_text(e: Expr) -> str:
    """Canonical minimal-parenthesis text; ``parse(to_text(e))`` prints identically."""
    return _render(e)[0]


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

class FunctionClass(enum.Enum):
    RATIONAL = "Rational"
    RATIONAL_PHASE = "RationalPhase"
    POWER_LOG = "PowerLog"
    GENERAL = "General"

    def join(self, other: "FunctionClass") -> "FunctionClass":
        if self is other:
            return self
        if self is FunctionClass.RATIONAL:
            return other
        if other is FunctionClass.RATIONAL:
            return self
        return FunctionClass.GENERAL

    def __le__(self, other: "FunctionClass") -> bool:
        return self.join(other) is other


def classify(e: Expr) -> FunctionClass:
    R, RP, PL, G = (FunctionClass.RATIONAL, FunctionClass.RATIONAL_PHASE,
                    FunctionClass.POWER_LOG, FunctionClass.GENERAL)
    if isinstance(e, (Const, Var)):
        return R
    if isinstance(e, (TPow, Log)):
        return PL
    if isinstance(e, Phase):
        return RP
    if isinstance(e, (Neg, IntPow)):
        return classify(children(e)[0])
    if isinstance(e, (Prod, Quot)):
        return reduce(FunctionClass.join, (classify(c) for c in children(e)), R)
    if isinstance(e, Sum):
        classes = [classify(c) for c in e.terms]
        if all(c is R for c in classes):
            return R
        if all(c in (R, PL) for c in classes):
            return PL
        if all(c in (R, RP) for c in classes):
            phases = {_phase_key(rational_phase_parts(c)[1]) for c in e.terms}
            return RP if len(phases) == 1 else G
        return G
    raise TypeError(f"unknown node {type(e).__name__}")


def _phase_key(p: tuple) -> tuple:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _add_phase(a: tuple, b: tuple, sign: int = 1) -> tuple:
    n = max(len(a), len(b))
    a = tuple(a) + (Fraction(0),) * (n - len(a))
    b = tuple(b) + (Fraction(0),) * (n - len(b))
    return _phase_key(tuple(x + sign * y for x, y in zip(a, b)))


def rational_phase_parts(e: Expr) -> tuple[RationalFn, tuple]:
    """Split a Rational/RationalPhase tree as ``R(t) * exp(i*P(t))``.

    Returns the exact rational factor and the real coefficients of ``P``
    (empty tuple for no phase).
    """
    if isinstance(e, Const):
        return RationalFn.const(e.value), ()
    if isinstance(e, Var):
        return RationalFn.t(), ()
    if isinstance(e, Phase):
        return RationalFn.const(1), _phase_key(e.poly)
    if isinstance(e, Neg):
        r, p = rational_phase_parts(e.arg)
        return -r, p
    if isinstance(e, IntPow):
        r, p = rational_phase_parts(e.base)
        return r ** e.n, _phase_key(tuple(Fraction(e.n) * c for c in p))
    if isinstance(e, Prod):
        r, p = RationalFn.const(1), ()
        for f in e.factors:
            rf, pf = rational_phase_parts(f)
            r, p = r * rf, _add_phase(p, pf)
        return r, p
    if isinstance(e, Quot):
        rn, pn = rational_phase_parts(e.num)
        rd, pd = rational_phase_parts(e.den)
        return rn / rd, _add_phase(pn, pd, -1)
    if isinstance(e, Sum):
        parts = [rational_phase_parts(t) for t in e.terms]
        phases = {p for _, p in parts}
        if len(phases) != 1:
            raise NotContinuable("sum of terms with different phases")
        return reduce(lambda a, b: a + b, (r for r, _ in parts)), parts[0][1]
    raise NotContinuable(f"{type(e).__name__} is not rational-times-phase")


def to_rational(e: Expr) -> RationalFn:
    """Exact ``RationalFn`` for a Rational-class expression."""
    if classify(e) is not FunctionClass.RATIONAL:
        raise NotContinuable(f"expression is {classify(e).value}, not Rational")
    return rational_phase_parts(e)[0]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _has_positive_domain(e: Node) -> bool:
    if isinstance(e, (TPow, Log)):
        return True
    return any(_has_positive_domain(c) for c in children(e))


def _denominators(e: Node):
    if isinstance(e, Quot):
        yield e.den_poly
    if isinstance(e, IntPow) and e.n < 0 and _is_polynomial(e.base):
        yield polynomial_of(e.base)
    for c in children(e):
        yield from _denominators(c)


_ROOT_CACHE: dict = {}


def _den_roots(p: CPoly) -> list[complex]:
    key = p.coeffs
    if key not in _ROOT_CACHE:
        _ROOT_CACHE[key] = [] if p.degree < 1 else [z for z, _ in roots(p)]
    return _ROOT_CACHE[key]


def _check_poles(e: Node, z, real_only: bool):
    zs = np.atleast_1d(np.asarray(z))
    for p in _denominators(e):
        for w in _den_roots(p):
            if real_only and abs(w.imag) > REAL_AXIS_TOL:
                continue
            if np.any(np.abs(zs - w) <= POLE_TOL):
                raise PoleError(f"pole hit near {w:.12g}")


def _eval(e: Node, z):
    if isinstance(e, Const):
        return complex(e.value)
    if isinstance(e, Var):
        return z
    if isinstance(e, Sum):
        return reduce(lambda a, b: a + b, (_eval(c, z) for c in e.terms))
    if isinstance(e, Neg):
        return -_eval(e.arg, z)
    if isinstance(e, Prod):
        return reduce(lambda a, b: a * b, (_eval(c, z) for c in e.factors))
    if isinstance(e, Quot):
        return _eval(e.num, z) / _eval(e.den, z)
    if isinstance(e, IntPow):
        b = _eval(e.base, z)
        if e.n >= 0:
            return b ** e.n
        return 1.0 / b ** (-e.n)
    if isinstance(e, TPow):
        return np.exp(complex(e.r) * np.log(z))
    if isinstance(e, Log):
        return np.log(z)
    if isinstance(e, Phase):
        ph = sum(float(c) * z ** k for k, c in enumerate(e.poly))
        return np.exp(1j * ph)
    raise TypeError(f"unknown node {type(e).__name__}")


def _as_complex_input(t, real: bool):
    if isinstance(t, np.ndarray):
        return t.astype(float if real else complex)
    return float(t) if real else complex(t)


def eval_real(e: Expr, t):
    """Value at real ``t`` (scalar or array) as complex."""
    t = _as_complex_input(t, real=True)
    if _has_positive_domain(e) and np.any(np.asarray(t) <= 0):
        raise DomainError("powers/logs of t require t > 0")
    _check_poles(e, t, real_only=True)
    tz = t.astype(complex) if isinstance(t, np.ndarray) else complex(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _eval(e, tz)
    if isinstance(tz, np.ndarray):
        out = np.broadcast_to(np.asarray(out, dtype=complex), tz.shape).copy()
    else:
        out = complex(out)
    if not np.all(np.isfinite(out)):
        raise PoleError("non-finite value (pole)")
    return out


def eval_complex(e: Expr, z):
    """Value of the holomorphic extension at complex ``z``."""
    cls = classify(e)
    if cls not in (FunctionClass.RATIONAL, FunctionClass.RATIONAL_PHASE):
        raise NotContinuable(f"class {cls.value} is not continued off the real line")
    z = _as_complex_input(z, real=False)
    _check_poles(e, z, real_only=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _eval(e, z)
    if isinstance(z, np.ndarray):
        out = np.broadcast_to(np.asarray(out, dtype=complex), z.shape).copy()
    else:
        out = complex(out)
    if not np.all(np.isfinite(out)):
        raise PoleError("non-finite value (pole)")
    return out


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _exact_json(v) -> dict:
    if isinstance(v, GaussianRational):
        return {"re": str(v.re), "im": str(v.im)}
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def to_json(e: Expr) -> dict:
    kind = type(e).__name__
    out: dict = {"kind": kind, "span": list(e.span)}
    if isinstance(e, Const):
        out["value"] = _exact_json(e.value)
    elif isinstance(e, TPow):
        out["r"] = _exact_json(e.r)
    elif isinstance(e, IntPow):
        out["n"] = e.n
    elif isinstance(e, Phase):
        out["poly"] = [str(Fraction(c)) for c in e.poly]
    kids = children(e)
    if kids:
        out["children"] = [to_json(c) for c in kids]
    return out
