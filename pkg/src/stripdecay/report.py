"""Orchestrate the analyses for one expression and serialize the result."""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import expr as ex
from .oracle import (
    DecayFit,
    FitError,
    NotIntegrable,
    QuadConfig,
    UnsupportedClass,
    decay_fit,
    integrands_of,
    quad_ft,
    riemann_ft,
)
from .poly import RationalFn
from .rational import (
    classify_integrability,
    degree_bound,
    pole_table_json,
    rationality_test,
    taylor_coefficients,
)
from .transforms import (
    MellinStripError,
    NotL1,
    delta_report,
    deep_decay_fit,
    eval_fourier_cf,
    fourier_closed_form,
    mellin_bridge,
    mellin_direct,
    mellin_strip,
)

SCHEMA_VERSION = "1.0"
ALL_CHECKS = ("closed_form", "decay_fit", "mellin", "rationality", "riemann_ft")

TOL_CLOSED_FORM = 1e-6
TOL_AT_ZERO = 1e-8
TOL_RATE_REL = 0.05
TOL_VANISHING = 1e-12
TOL_MELLIN = 1e-7
TOL_RIEMANN = 1e-6
TOL_IDENTITY = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    expression: str
    xi_max: float = 8.0
    xi_samples: int = 64
    quad: QuadConfig = QuadConfig()
    checks: frozenset = frozenset(ALL_CHECKS)
    report_path: Optional[str] = None
    plot_path: Optional[str] = None

    def __post_init__(self):
        unknown = set(self.checks) - set(ALL_CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(sorted(unknown))}")
        if "decay_fit" in self.checks and self.xi_samples < 24:
            raise ConfigError("decay_fit needs xi_samples >= 24")
        if not self.xi_max > 0:
            raise ConfigError("xi_max must be positive")

    @property
    def fit_grid(self) -> np.ndarray:
        """|xi| sample points shared by both sides: ``xi_samples`` points on [xi_max/4, xi_max]."""
        return np.linspace(self.xi_max / 4, self.xi_max, self.xi_samples)


@dataclass
class Residual:
    name: str
    value: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.ok}


@dataclass
class Report:
    config: AnalysisConfig
    canonical: str
    ast: dict
    function_class: str
    sections: dict = field(default_factory=dict)
    skips: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    plot: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.residuals)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self, include_timings: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "status": self.status,
            "input": self.config.expression,
            "canonical": self.canonical,
            "ast": self.ast,
            "class": self.function_class,
            "config": {
                "xi_max": self.config.xi_max,
                "xi_samples": self.config.xi_samples,
                "checks": sorted(self.config.checks),
                "quad": self.config.quad.to_json(),
            },
            "sections": self.sections,
            "skips": self.skips,
            "residuals": [r.to_json() for r in self.residuals],
            "versions": {
                "stripdecay": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
        }
        if include_timings:
            out["timings"] = self.timings
        return out


# ---------------------------------------------------------------------------
# analysis steps
# ---------------------------------------------------------------------------

def _xi_side(grid: np.ndarray, side: int) -> np.ndarray:
    # side + studies xi -> -inf
    return -side * grid


def _closed_form_step(rep: Report, f: RationalFn, cfg: AnalysisConfig) -> None:
    cf = fourier_closed_form(f)
    grid = np.arange(-4.0, 4.0 + 1e-12, 0.25)
    engine = eval_fourier_cf(cf, grid)
    oracle = np.array([quad_ft(f, float(x), cfg.quad) for x in grid])
    rep.sections["closed_form"] = {
        "transform": cf.to_json(),
        "check_grid": {"start": -4.0, "stop": 4.0, "step": 0.25},
        "max_abs_diff": float(np.max(np.abs(engine - oracle))),
    }
    rep.residuals.append(Residual("closed_form_vs_quadrature", float(np.max(np.abs(engine - oracle))), TOL_CLOSED_FORM))
    rep.residuals.append(Residual("closed_form_at_zero", float(abs(cf.value_at_zero - oracle[16])), TOL_AT_ZERO))


def _decay_step(rep: Report, e, f: Optional[RationalFn], cfg: AnalysisConfig) -> None:
    grid = cfg.fit_grid
    fits = {}
    plot = {"abs_xi": grid.tolist()}
    if f is not None:
        cf = fourier_closed_form(f)
        dh = delta_report(f).delta_H
        for side, key in ((1, "+"), (-1, "-")):
            xs = _xi_side(grid, side)
            engine = eval_fourier_cf(cf, xs)
            oracle = np.array([quad_ft(f, float(x), cfg.quad) for x in xs])
            plot[f"engine{key}"] = np.abs(engine).tolist()
            plot[f"oracle{key}"] = np.abs(oracle).tolist()
            target = dh[0] if side == 1 else dh[1]
            if math.isinf(target):
                peak = float(np.max(np.abs(engine)))
                fits[key] = {"rate": "inf", "max_abs_F": peak, "source": "engine"}
                plot[f"envelope{key}"] = [0.0] * len(grid)
                rep.residuals.append(Residual(f"vanishing_side{key}", peak, TOL_VANISHING))
                continue
            # the plotted window can be too short when poles crowd together,
            # so the residual comes from the deep closed-form fit
            deep = deep_decay_fit(cf, side)
            fits[key] = dict(deep.to_json(), source="engine_deep")
            try:
                fit = decay_fit(list(zip(xs, engine)), side, floor=0.0)
                fits[key]["plot_window_fit"] = fit.to_json()
                plot[f"envelope{key}"] = fit.envelope(xs).tolist()
            except FitError as err:
                fits[key]["plot_window_fit"] = {"skipped": str(err)}
                plot[f"envelope{key}"] = [math.nan] * len(grid)
            rep.residuals.append(Residual(f"delta_F_fit{key}_vs_delta_H", abs(deep.rate - target) / target, TOL_RATE_REL))
    else:
        for side, key in ((1, "+"), (-1, "-")):
            xs = _xi_side(grid, side)
            oracle = np.array([quad_ft(e, float(x), cfg.quad) for x in xs])
            plot[f"engine{key}"] = [math.nan] * len(grid)
            plot[f"oracle{key}"] = np.abs(oracle).tolist()
            floor = 100 * cfg.quad.abs_tol
            try:
                fit = decay_fit(list(zip(xs, oracle)), side, floor=floor)
                fits[key] = dict(fit.to_json(), source="oracle")
                plot[f"envelope{key}"] = fit.envelope(xs).tolist()
            except FitError as err:
                fits[key] = {"skipped": str(err), "source": "oracle"}
                plot[f"envelope{key}"] = [math.nan] * len(grid)
    rep.sections["decay_fit"] = fits
    rep.plot = plot


def _mellin_points(strip) -> list[complex]:
    lo = strip.alpha if math.isfinite(strip.alpha) else strip.beta - 4
    hi = strip.beta if math.isfinite(strip.beta) else strip.alpha + 4
    c = 0.5 * (lo + hi)
    return [complex(c, 2 * math.pi * eta) for eta in (-0.25, -0.1, 0.0, 0.1, 0.25)]


def _mellin_step(rep: Report, target, cfg: AnalysisConfig) -> None:
    strip = mellin_strip(target)
    rows = []
    worst = 0.0
    for s in _mellin_points(strip):
        b = mellin_bridge(target, s, cfg.quad, strip)
        d = mellin_direct(target, s, cfg.quad, strip)
        worst = max(worst, abs(b - d))
        rows.append({"s": [s.real, s.imag], "bridge": [b.real, b.imag], "direct": [d.real, d.imag]})
    rep.sections["mellin"] = {"strip": strip.to_json(), "samples": rows, "max_abs_diff": worst}
    rep.residuals.append(Residual("mellin_bridge_vs_direct", worst, TOL_MELLIN))


def _rationality_step(rep: Report, f: RationalFn) -> None:
    K = max(f.num.degree, f.den.degree, 0)
    coeffs = taylor_coefficients(f, 2 * K + 2)
    res = rationality_test(coeffs, K)
    found = degree_bound(coeffs, K)
    ok = res.rational and res.reconstruction is not None
    if ok and f.exact:
        err = 0.0 if res.reconstruction == f else 1.0
    elif ok:
        probe = np.array([0.1, -0.2 + 0.1j, 0.05j])
        err = float(np.max(np.abs(res.reconstruction(probe) - f(probe))))
    else:
        err = math.inf
    rep.sections["rationality"] = {
        "K": K,
        "coefficients_used": len(coeffs),
        "rational": res.rational,
        "degree_bound": found,
        "exact": f.exact,
    }
    rep.residuals.append(Residual("rationality_reconstruction", err, 1e-9))
    rep.residuals.append(Residual("degree_bound_matches", 0.0 if found == K else 1.0, 0.0))


def _riemann_step(rep: Report, e, f: Optional[RationalFn], cfg: AnalysisConfig) -> None:
    rows = []
    worst = 0.0
    cf = None
    if f is not None:
        try:
            cf = fourier_closed_form(f)
        except NotL1:
            cf = None
    for xi in (0.0, 0.5, 1.0, 2.0):
        try:
            r = riemann_ft(e, xi, cfg.quad)
        except NotIntegrable as err:
            rows.append({"xi": xi, "skipped": str(err)})
            continue
        row = {"xi": xi, **r.to_json()}
        worst = max(worst, r.acceleration_error_estimate)
        if cf is not None:
            row["closed_form_diff"] = abs(r.value - eval_fourier_cf(cf, xi))
            worst = max(worst, row["closed_form_diff"])
        rows.append(row)
    if all("skipped" in row for row in rows):
        raise NotIntegrable(rows[0]["skipped"])
    rep.sections["riemann_ft"] = {"samples": rows}
    rep.residuals.append(Residual("riemann_ft_error", worst, TOL_RIEMANN))


def analyze(cfg: AnalysisConfig) -> Report:
    e = ex.parse(cfg.expression)
    cls = ex.classify(e)
    rep = Report(cfg, ex.to_text(e), ex.to_json(e), cls.value)
    F = ex.FunctionClass
    f: Optional[RationalFn] = ex.to_rational(e) if cls is F.RATIONAL else None
    rational_part: Optional[RationalFn] = None
    if cls is F.RATIONAL_PHASE:
        rational_part = ex.rational_phase_parts(e)[0]

    t0 = time.perf_counter()
    base = f if f is not None else rational_part
    if base is not None:
        rep.sections["integrability"] = classify_integrability(base).to_json()
        rep.sections["poles"] = pole_table_json(base)
    if f is not None:
        dr = delta_report(f)
        rep.sections["delta"] = dr.to_json()
        if not any(math.isnan(x) for x in dr.delta_F_exact):
            rep.residuals.append(Residual("delta_F_exact_eq_delta_H", _pair_gap(dr.delta_F_exact, dr.delta_H), TOL_IDENTITY))
        if not any(math.isnan(x) for x in dr.theta_H):
            rep.residuals.append(Residual("delta_M_eq_theta_H", _pair_gap(dr.delta_M, dr.theta_H), TOL_IDENTITY))
    rep.timings["structure"] = time.perf_counter() - t0

    l1 = f is not None and classify_integrability(f).L1_on_R
    phase_l1 = rational_part is not None and classify_integrability(rational_part).L1_on_R

    steps = {
        "closed_form": (
            (lambda: _closed_form_step(rep, f, cfg)) if l1 else None,
            _skip_reason_closed_form(cls, f),
        ),
        "decay_fit": (
            (lambda: _decay_step(rep, e, f if l1 else None, cfg)) if (l1 or phase_l1) else None,
            "transform is not an L1 Fourier transform in this class" if not (l1 or phase_l1) else "",
        ),
        "mellin": (
            (lambda: _mellin_step(rep, f if f is not None else e, cfg)) if cls in (F.RATIONAL, F.POWER_LOG) else None,
            f"class {cls.value} has no Mellin transform in this artifact",
        ),
        "rationality": (
            (lambda: _rationality_step(rep, f)) if f is not None else None,
            f"class {cls.value} is not rational",
        ),
        "riemann_ft": (
            (lambda: _riemann_step(rep, e, f, cfg)) if cls in (F.RATIONAL, F.RATIONAL_PHASE) else None,
            f"class {cls.value} is not rational times a phase",
        ),
    }
    for name in ALL_CHECKS:
        if name not in cfg.checks:
            continue
        run, reason = steps[name]
        if run is None:
            rep.skips[name] = reason
            continue
        t0 = time.perf_counter()
        try:
            run()
        except (MellinStripError, NotIntegrable, NotL1, UnsupportedClass, ZeroDivisionError) as err:
            rep.skips[name] = str(err)
        except ValueError as err:
            if name == "rationality":
                rep.skips[name] = str(err)
            else:
                raise
        rep.timings[name] = time.perf_counter() - t0
    return rep


def _pair_gap(a, b) -> float:
    gap = 0.0
    for x, y in zip(a, b):
        if math.isinf(x) and math.isinf(y) and (x > 0) == (y > 0):
            continue
        gap = max(gap, abs(x - y))
    return gap


def _skip_reason_closed_form(cls, f) -> str:
    if f is None:
        return f"class {cls.value} has no closed-form transform"
    rep = classify_integrability(f)
    if rep.real_poles:
        return "real pole: not L1"
    return f"degree gap {rep.degree_gap} < 2: not L1"


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def _dump(obj, indent: int, level: int = 0) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return _dump([obj.real, obj.imag], indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{_dump(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json_text(r: Report, include_timings: bool = True) -> str:
    return _dump(r.to_json(include_timings), 2) + "\n"


def _plot_csv(r: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["abs_xi", "engine+", "oracle+", "envelope+", "engine-", "oracle-", "envelope-"]
    w.writerow(["abs_xi", "F_engine_plus", "F_oracle_plus", "envelope_plus",
                "F_engine_minus", "F_oracle_minus", "envelope_minus"])
    n = len(r.plot.get("abs_xi", []))
    for i in range(n):
        w.writerow([format(float(r.plot[c][i]), ".17g") for c in cols])
    return buf.getvalue()


def _text(r: Report) -> str:
    rows = [("status", r.status.upper()), ("input", r.config.expression),
            ("canonical", r.canonical), ("class", r.function_class)]
    delta = r.sections.get("delta")
    if delta:
        for key in ("delta_H", "delta_F_exact", "theta_H", "delta_M"):
            for side in ("+", "-"):
                rows.append((f"{key}{side}", _short(delta[key][side])))
    fits = r.sections.get("decay_fit", {})
    for side in ("+", "-"):
        if side in fits:
            fit = fits[side]
            rows.append((f"delta_F_fit{side}", _short(fit.get("rate", fit.get("skipped", "")))))
            if "power" in fit:
                rows.append((f"power_fit{side}", _short(fit["power"])))
    mel = r.sections.get("mellin")
    if mel:
        rows.append(("mellin_strip", f"({_short(mel['strip']['alpha'])}, {_short(mel['strip']['beta'])})"))
    for res in r.residuals:
        rows.append((res.name, f"{res.value:.3e} <= {res.tolerance:.1e} {'ok' if res.ok else 'FAIL'}"))
    for name, why in sorted(r.skips.items()):
        rows.append((f"skip:{name}", why))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def _short(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def emit(r: Report, format: str = "json") -> bytes:
    if format == "json":
        return to_json_text(r).encode()
    if format == "csv_plot":
        return _plot_csv(r).encode()
    if format == "text":
        return _text(r).encode()
    raise ValueError(f"unknown format {format!r}")
