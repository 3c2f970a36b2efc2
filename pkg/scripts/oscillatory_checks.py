"""Tables for the oscillatory integrals handled by the improper-integral oracle.

    python3 scripts/oscillatory_checks.py [--xi 10 20 30 50 80]

Columns:
  fresnel    |F_R[exp(i t^2)](xi)| against sqrt(pi) and the exact phase
  quartic    |F_R[t exp(i t^4/4)](xi / 2 pi)| over its stationary-phase limit sqrt(2 pi / 3)
  slow       |F[exp(i t^2)/(1+t^2)](xi)| * xi^2 over pi^(-3/2)
  chain      F[g] against F_R[f] / (i 2 pi xi) for the tail antiderivative g of t exp(i t^4/4)
"""
from __future__ import annotations

import argparse
import cmath
import math
from dataclasses import dataclass

import numpy as np

from stripdecay.oracle import antiderivative_integrand, decay_fit, quad_ft, riemann_ft

PI = math.pi
QUARTIC = "t*exp(i*t^4/4)"


@dataclass(frozen=True)
class OscConfig:
    fresnel_xi: tuple = (0.0, 0.5, 1.0, 2.0, 4.0)
    quartic_xi: tuple = (10.0, 20.0, 30.0, 50.0, 80.0)
    slow_xi: tuple = (2.0, 5.0, 10.0, 20.0)
    chain_xi: tuple = (0.5, 1.0, 2.0, 4.0)


def fresnel_table(cfg: OscConfig) -> None:
    print("fresnel: xi, |F| - sqrt(pi), |F - exact|")
    for x in cfg.fresnel_xi:
        v = riemann_ft("exp(i*t^2)", x).value
        exact = math.sqrt(PI) * cmath.exp(1j * PI / 4 - 1j * (PI * x) ** 2)
        print(f"  {x:6.2f}  {abs(v) - math.sqrt(PI):+.2e}  {abs(v - exact):.2e}")


def quartic_table(cfg: OscConfig) -> None:
    # with lam = xi^(4/3) the first correction is i/lam times the leading term, so it
    # shifts the phase only and the modulus ratio moves by O(lam^-2) = O(xi^(-8/3))
    print("quartic: xi, ratio - 1, (ratio - 1) * xi^(8/3)")
    target = math.sqrt(2 * PI / 3)
    for x in cfg.quartic_xi:
        r = abs(riemann_ft(QUARTIC, x / (2 * PI)).value) / target - 1
        print(f"  {x:6.1f}  {r:+.3e}  {r * x ** (8 / 3):+.3e}")


def slow_table(cfg: OscConfig) -> None:
    print("slow decay: xi, |F(xi)| xi^2 / pi^-1.5, same at -xi")
    for x in cfg.slow_xi:
        a = abs(quad_ft("exp(i*t^2)/(1+t^2)", x)) * x ** 2 / PI ** -1.5
        b = abs(quad_ft("exp(i*t^2)/(1+t^2)", -x)) * x ** 2 / PI ** -1.5
        print(f"  {x:6.1f}  {a:.5f}  {b:.5f}")


def chain_table(cfg: OscConfig) -> None:
    g = antiderivative_integrand(QUARTIC)
    print("antiderivative chain: xi, |F[g] - F_R[f]/(i 2 pi xi)|")
    for x in cfg.chain_xi:
        d = abs(quad_ft(g, x) - riemann_ft(QUARTIC, x).value / (2j * PI * x))
        print(f"  {x:6.2f}  {d:.2e}")
    xs = np.linspace(1.0, 8.0, 40)
    fit = decay_fit(list(zip(xs, [abs(quad_ft(g, float(x))) for x in xs])), -1)
    print(f"  envelope of |F[g]|: rate {fit.rate:+.2e}, power {fit.power:+.4f}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xi", type=float, nargs="+", help="override the quartic xi values")
    args = ap.parse_args(argv)
    cfg = OscConfig() if not args.xi else OscConfig(quartic_xi=tuple(args.xi))
    fresnel_table(cfg)
    quartic_table(cfg)
    slow_table(cfg)
    chain_table(cfg)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
