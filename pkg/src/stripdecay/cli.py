"""Command-line front end: ``stripdecay analyze "<expr>" ...``."""
from __future__ import annotations

import argparse
import sys

from .expr import ParseError
from .oracle import QuadConfig
from .report import ALL_CHECKS, AnalysisConfig, ConfigError, analyze, emit

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_INPUT = 3


def _checks(text: str) -> frozenset:
    items = [c.strip() for c in text.split(",") if c.strip()]
    if items == ["all"]:
        return frozenset(ALL_CHECKS)
    return frozenset(items)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stripdecay", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="analyze one expression in t")
    a.add_argument("expression")
    a.add_argument("--xi-max", type=float, default=8.0)
    a.add_argument("--xi-samples", type=int, default=64)
    a.add_argument("--quad-tol", type=float, default=1e-10, help="absolute and relative quadrature tolerance")
    a.add_argument("--checks", type=str, default="all", help=f"comma list from {', '.join(ALL_CHECKS)}")
    a.add_argument("--report", metavar="PATH", help="write the JSON report here")
    a.add_argument("--emit-plot", metavar="PATH", help="write plot data (CSV) here")
    a.add_argument("--format", choices=("text", "json"), default="text", help="stdout format")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = AnalysisConfig(
            expression=args.expression,
            xi_max=args.xi_max,
            xi_samples=args.xi_samples,
            quad=QuadConfig(abs_tol=args.quad_tol, rel_tol=args.quad_tol),
            checks=_checks(args.checks),
            report_path=args.report,
            plot_path=args.emit_plot,
        )
        rep = analyze(cfg)
    except ParseError as err:
        print(f"parse error at byte {err.offset}: {err.reason}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, ValueError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if cfg.report_path:
            with open(cfg.report_path, "wb") as fh:
                fh.write(emit(rep, "json"))
        if cfg.plot_path:
            with open(cfg.plot_path, "wb") as fh:
                fh.write(emit(rep, "csv_plot"))
    except OSError as err:
        print(f"could not write output: {err}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(emit(rep, args.format).decode())
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
