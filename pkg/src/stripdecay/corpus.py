"""Fixture functions and seeded generators shared by tests and scripts."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .gaussian import GaussianRational
from .poly import CPoly, RationalFn

# integrable rational functions with no real poles
RATIONAL_L1 = (
    "1/(1+t^2)",
    "1/(t-i)^2",
    "1/((t-i)*(t-2*i))",
    "1/((t+i)*(t+2*i))",
    "1/(1+t^2)^2",
    "t/(1+t^4)",
    "1/(t^2+2*t+2)",
    "(t+3)/((t^2+1/4)*(t^2+2*t+5))",
    "i/(t^4+4)",
    "(2-i*t)/(t-3*i)^3",
    "1/(t^2-t+1)",
    "(1+2*i)/((t-1/2-i)*(t+1+i/2))",
)

# pole-free on t >= 0, with a nonempty Mellin strip
MELLIN_SET = (
    "1/(1+t^2)",
    "1/(1+t)^3",
    "t/(1+t^4)",
    "1/(t^2+2*t+2)",
    "(t+2)/((t+1)*(t^2+t+1))",
)

RATIONAL_PHASE = (
    "exp(i*t^2)",
    "exp(i*t^2)/(1+t^2)",
    "t*exp(i*t^4/4)",
    "exp(i*(t^3-t))/(1+t^2)",
)

POWER_LOG = (
    "t^(1/2)/(1+t^2)",
    "log(t)/(1+t^2)",
    "t^(1/3)*log(t)^2/(1+t)^3",
)

# grammar-valid strings for printer and parser properties
PARSER_STRINGS = RATIONAL_L1 + MELLIN_SET + RATIONAL_PHASE + POWER_LOG + (
    "t",
    "-t^3+2*t-7",
    "(3/4+i/5)*t^2",
    "1/t",
    "t/(1+t^2)",
    "2.5*t - 0.125",
    "exp(i*(2*t-t^2/3))*(t+i)/(t^3+8)",
    "t^(2+i)*log(t)/(t+1)^4",
    "((t))",
    "-(t-1)^2/(t+1)^2",
)


def _gauss(rng: np.random.Generator, lo: int = -5, hi: int = 5) -> GaussianRational:
    """Small Gaussian rational with denominator up to 4."""
    den = int(rng.integers(1, 5))
    return GaussianRational(Fraction(int(rng.integers(lo, hi + 1)), den), Fraction(int(rng.integers(lo, hi + 1)), den))


def random_l1_rational(rng: np.random.Generator, im_range=(0.3, 3.0), max_poles: int = 4,
                       double_prob: float = 0.2) -> RationalFn:
    """Float rational function with 2..max_poles distinct poles and degree gap at least 2.

    Pole imaginary parts have magnitude in ``im_range`` with random signs,
    so some draws have all poles on one side and a vanishing branch.
    Each pole is doubled with probability ``double_prob``.
    """
    n = int(rng.integers(2, max_poles + 1))
    locs: list[complex] = []
    for _ in range(n):
        im = rng.uniform(*im_range) * rng.choice([-1.0, 1.0])
        z = complex(rng.uniform(-2.0, 2.0), im)
        locs += [z, z] if rng.random() < double_prob else [z]
    den = CPoly.from_roots(locs)
    k = int(rng.integers(0, len(locs) - 1))
    num = CPoly([complex(rng.normal(), rng.normal()) for _ in range(k + 1)])
    return RationalFn(num, den)


def random_exact_rational(rng: np.random.Generator, max_degree: int = 4) -> RationalFn:
    """Exact rational function with ``max(deg num, deg den) <= max_degree`` and den(0) != 0."""
    while True:
        dd = int(rng.integers(0, max_degree + 1))
        dn = int(rng.integers(0, max_degree + 1))
        den = CPoly([_gauss(rng) for _ in range(dd + 1)])
        num = CPoly([_gauss(rng) for _ in range(dn + 1)])
        if den.is_zero() or num.is_zero() or den.degree != dd:
            continue
        if den.coeffs[0] == GaussianRational(0):
            continue
        return RationalFn(num, den)
