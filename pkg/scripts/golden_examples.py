"""Run the full analyzer on the hand-checkable examples and compare with known values.

    python3 scripts/golden_examples.py [--out DIR] [--xi-samples N]
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stripdecay.oracle import quad_ft_grid
from stripdecay.report import AnalysisConfig, analyze, emit
from stripdecay.transforms import mellin_eval

PI = math.pi


@dataclass(frozen=True)
class Golden:
    expr: str
    exact: object  # callable xi -> F(xi)
    delta_H: tuple


GOLDEN = (
    Golden("1/(1+t^2)", lambda x: PI * np.exp(-2 * PI * np.abs(x)), (1.0, 1.0)),
    Golden("1/(t-i)^2", lambda x: np.where(x < 0, 4 * PI ** 2 * x * np.exp(2 * PI * np.minimum(x, 0)), 0.0), (1.0, math.inf)),
    Golden("1/((t-i)*(t-2*i))", lambda x: np.where(x < 0, -2 * PI * (np.exp(2 * PI * np.minimum(x, 0))
                                                                   - np.exp(4 * PI * np.minimum(x, 0))), 0.0),
           (1.0, math.inf)),
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="directory for JSON reports")
    ap.add_argument("--xi-samples", type=int, default=128)
    args = ap.parse_args(argv)

    grid = np.arange(-4.0, 4.0 + 1e-9, 0.25)
    ok = True
    for g in GOLDEN:
        rep = analyze(AnalysisConfig(g.expr, xi_samples=args.xi_samples))
        quad_err = float(np.max(np.abs(quad_ft_grid(g.expr, grid) - g.exact(grid))))
        dh = rep.sections["delta"]["delta_H"]
        dh = tuple(math.inf if dh[k] == "inf" else dh[k] for k in "+-")
        good = rep.passed and quad_err <= 1e-6 and dh == g.delta_H
        ok &= good
        print(f"{g.expr:24s} report={rep.status:4s} quad_err={quad_err:.2e} delta_H={dh} -> {'ok' if good else 'MISMATCH'}")
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            name = "".join(ch if ch.isalnum() else "_" for ch in g.expr).strip("_")
            (args.out / f"{name}.json").write_bytes(emit(rep, "json"))

    # Mellin values of the Lorentzian along a vertical line
    for s, want in ((1.0, PI / 2), (complex(1, 2 * PI * 0.1), PI / (2 * math.cosh(0.1 * PI ** 2)))):
        got = mellin_eval("1/(1+t^2)", s)
        ok &= abs(got - want) <= 1e-7
        print(f"M[1/(1+t^2)]({s}) = {got.real:.12f}{got.imag:+.1e}i  expected {want:.12f}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
