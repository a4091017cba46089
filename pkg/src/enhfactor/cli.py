"""Command-line front end.

Subcommands
-----------
formfactor   table of (s, B2(s|kappa)) over an s-grid
curve        long-format enhancement curves F(eta|kappa) per method, plus the
             universal tangent line 2 - eta/2 (re-plottable into the standard
             three-curve figure with its small/large-kappa overlays)
critical     (kappa, eta_c, f_min) rows for a kappa list
invert       chaoticity estimate from an observed minimum enhancement
simulate     Monte Carlo run with optional comparison against the analytic value

Common flags: --out PATH, --format {csv,json}, --abs-tol, --rel-tol, --seed,
--threads, --config FILE (simple key=value lines, overridden by flags).

Exit codes: 0 success, 2 domain error, 3 convergence/solver error,
4 statistical-comparison failure (simulate --compare with |z| >= threshold).
Errors print one machine-parsable JSON line to stderr.

Output schemas (stable, versioned in the '#' header comments):
  formfactor.v1: s, b2, abs_error_estimate
  curve.v1:      kappa, eta, f, method        (kappa is 'nan' on tangent rows)
  critical.v1:   kappa, eta_c, f_min, error
  invert.v1:     f_min_observed, kappa, f_roundtrip
  simulate.v1:   JSON report; per-realization CSV (--per-realization):
                 realization, mean_diag_s_re, mean_diag_s_im, elastic_power,
                 offdiag_power, delay
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    EnhFactorError,
    NoCriticalPointError,
    SolverError,
    UnsupportedCaseError,
)
from .formfactor import Chaoticity, b2_transient_with_error
from .enhancement import (
    approx_large_kappa,
    enhancement_exact,
    series_small_kappa,
)
from .critical import eta_critical, kappa_from_fmin
from .numerics import DEFAULT_QUADRATURE, QuadratureConfig
from .rmtsim import (
    Ensemble,
    ScatteringModel,
    _delay_stats_from_records,
    _enhancement_from_records,
    _mean_s_and_transmission_from_records,
    calibrate_kappa,
    collect_realizations,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3
EXIT_COMPARISON = 4

_SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit_error(kind: str, exit_code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "exit_code": exit_code,
                                 "message": message}) + "\n")
    return exit_code


def _write_table(path, fmt: str, schema: str, params: dict, columns: list[str],
                 rows: list[dict]):
    if fmt == "json":
        payload = {"schema": f"{schema}.v{_SCHEMA_VERSION}", "params": params, "rows": rows}
        text = json.dumps(payload, indent=2, default=str) + "\n"
    else:
        lines = [f"# enhfactor {__version__} schema={schema}.v{_SCHEMA_VERSION}"]
        for key, value in params.items():
            lines.append(f"# {key}={value}")
        lines.append(",".join(columns))
        for row in rows:
            cells = []
            for col in columns:
                value = row[col]
                cells.append(_fmt(value) if isinstance(value, float) else str(value))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _parse_grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:step' into an inclusive grid."""
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise DomainError(f"grid must be 'start:stop:step', got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise DomainError(f"grid needs step > 0 and stop >= start, got {spec!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def _parse_kappa(token: str) -> Chaoticity:
    token = token.strip().lower()
    if token in ("inf", "infinite", "infinity"):
        return Chaoticity.infinite()
    try:
        return Chaoticity(float(token))
    except ValueError as exc:
        raise DomainError(f"cannot parse chaoticity value {token!r}") from exc


def _kappa_label(k: Chaoticity) -> str:
    return "inf" if k.is_infinite else _fmt(k.kappa)


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, parser_defaults: dict):
    """Fill None-valued options from the config file, then from hard defaults."""
    file_values = _load_config_file(args.config) if args.config else {}
    known = set(parser_defaults)
    for key in file_values:
        if key not in known:
            raise DomainError(f"unknown config key {key!r} (known: {sorted(known)})")
    for key, default in parser_defaults.items():
        if getattr(args, key, None) is None:
            if key in file_values:
                raw = file_values[key]
                caster = type(default) if default is not None else str
                if caster is bool:
                    value = raw.lower() in ("1", "true", "yes", "on")
                else:
                    value = caster(raw)
                setattr(args, key, value)
            else:
                setattr(args, key, default)


def _quadrature_config(args) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                            max_subdivisions=DEFAULT_QUADRATURE.max_subdivisions,
                            tail_cutoff=DEFAULT_QUADRATURE.tail_cutoff)


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--out", default=None, help="output path (default: stdout)")
    sub.add_argument("--format", dest="out_format", choices=("csv", "json"), default=None)
    sub.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    sub.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--config", default=None, help="key=value config file; flags win")


_COMMON_DEFAULTS = {
    "out_format": "csv",
    "abs_tol": DEFAULT_QUADRATURE.abs_tol,
    "rel_tol": DEFAULT_QUADRATURE.rel_tol,
    "seed": 1,
    "threads": 1,
}


def _cmd_formfactor(args) -> int:
    _apply_config(args, _COMMON_DEFAULTS | {"kappa": "5", "grid": "0:2:0.05"})
    cfg = _quadrature_config(args)
    kappa = _parse_kappa(args.kappa)
    grid = _parse_grid(args.grid)
    rows = []
    for s in grid:
        value, err = b2_transient_with_error(float(s), kappa, cfg)
        rows.append({"s": float(s), "b2": value, "abs_error_estimate": err})
    params = {"kappa": _kappa_label(kappa), "grid": args.grid,
              "abs_tol": args.abs_tol, "rel_tol": args.rel_tol}
    _write_table(args.out, args.out_format, "formfactor", params,
                 ["s", "b2", "abs_error_estimate"], rows)
    return EXIT_OK


_CURVE_METHODS = ("exact", "series", "large-kappa", "all")


def _cmd_curve(args) -> int:
    _apply_config(args, _COMMON_DEFAULTS | {
        "kappa_list": "0.5,5,50", "grid": "0:12:0.25", "method": "all",
        "series_order": 3,
    })
    if args.method not in _CURVE_METHODS:
        raise DomainError(f"method must be one of {_CURVE_METHODS}, got {args.method!r}")
    cfg = _quadrature_config(args)
    kappas = [_parse_kappa(tok) for tok in args.kappa_list.split(",") if tok.strip()]
    grid = _parse_grid(args.grid)
    rows = []
    for kappa in kappas:
        label = _kappa_label(kappa)
        for eta in grid:
            eta = float(eta)
            if args.method in ("exact", "all"):
                rows.append({"kappa": label, "eta": eta,
                             "f": enhancement_exact(eta, kappa, cfg).f, "method": "exact"})
            if args.method in ("series", "all"):
                usable = eta > 0 and not kappa.is_infinite
                f = series_small_kappa(eta, kappa, args.series_order).f if usable else math.nan
                rows.append({"kappa": label, "eta": eta, "f": f,
                             "method": "series_small_kappa"})
            if args.method in ("large-kappa", "all"):
                usable = kappa.kappa > 0
                f = approx_large_kappa(eta, kappa).f if usable else math.nan
                rows.append({"kappa": label, "eta": eta, "f": f,
                             "method": "approx_large_kappa"})
    for eta in grid:
        rows.append({"kappa": "nan", "eta": float(eta), "f": 2.0 - 0.5 * float(eta),
                     "method": "tangent"})
    params = {"kappa_list": ",".join(_kappa_label(k) for k in kappas), "grid": args.grid,
              "method": args.method, "series_order": args.series_order,
              "abs_tol": args.abs_tol, "rel_tol": args.rel_tol}
    _write_table(args.out, args.out_format, "curve", params,
                 ["kappa", "eta", "f", "method"], rows)
    return EXIT_OK


def _cmd_critical(args) -> int:
    _apply_config(args, _COMMON_DEFAULTS | {"kappa_list": "0.5,5,50"})
    cfg = _quadrature_config(args)
    kappas = [_parse_kappa(tok) for tok in args.kappa_list.split(",") if tok.strip()]
    rows = []
    failures = 0
    for kappa in kappas:
        label = _kappa_label(kappa)
        try:
            cp = eta_critical(kappa, cfg)
            rows.append({"kappa": label, "eta_c": cp.eta_c, "f_min": cp.f_min, "error": ""})
        except EnhFactorError as exc:
            failures += 1
            rows.append({"kappa": label, "eta_c": "nan", "f_min": "nan",
                         "error": str(exc).replace(",", ";")})
    params = {"kappa_list": ",".join(_kappa_label(k) for k in kappas),
              "abs_tol": args.abs_tol, "rel_tol": args.rel_tol}
    _write_table(args.out, args.out_format, "critical", params,
                 ["kappa", "eta_c", "f_min", "error"], rows)
    if failures:
        return _emit_error("domain", EXIT_DOMAIN,
                           f"{failures} of {len(kappas)} kappa values have no critical point")
    return EXIT_OK


def _cmd_invert(args) -> int:
    _apply_config(args, _COMMON_DEFAULTS)
    cfg = _quadrature_config(args)
    kappa = kappa_from_fmin(args.fmin, cfg)
    cp = eta_critical(kappa, cfg)
    rows = [{"f_min_observed": float(args.fmin), "kappa": kappa.kappa,
             "f_roundtrip": cp.f_min}]
    params = {"f_min_observed": args.fmin, "abs_tol": args.abs_tol, "rel_tol": args.rel_tol}
    _write_table(args.out, args.out_format, "invert", params,
                 ["f_min_observed", "kappa", "f_roundtrip"], rows)
    return EXIT_OK


def _analytic_reference(args, model: ScatteringModel, cfg: QuadratureConfig,
                        n_calibration: int) -> tuple[float, str]:
    kind = model.ensemble.kind.value
    if kind == "gue":
        return enhancement_exact(model.openness, Chaoticity.infinite(), cfg).f, "kappa=inf"
    if kind == "poisson":
        return 2.0, "kappa=0"
    cal = calibrate_kappa(model.ensemble.transition_strength, model.n_levels,
                          model.mean_spacing, n_calibration, args.seed, cfg)
    f = enhancement_exact(model.openness, cal.kappa, cfg).f
    return f, f"kappa={cal.kappa.kappa:.6g} (calibrated, rms={cal.residual_rms:.3g})"


def _cmd_simulate(args) -> int:
    _apply_config(args, _COMMON_DEFAULTS | {
        "ensemble": "gue", "n_levels": 200, "n_channels": 20, "openness": 1.0,
        "transition_strength": 0.0, "mean_spacing": 1.0, "n_realizations": 500,
        "compare": False, "z_threshold": 3.0, "per_realization": "",
        "n_calibration": 300,
    })
    if args.out_format == "csv":
        raise DomainError("the simulate report is JSON; use --per-realization PATH "
                          "for the per-realization CSV records")
    cfg = _quadrature_config(args)
    kind = args.ensemble.strip().lower()
    if kind == "poisson":
        ensemble = Ensemble.poisson()
    elif kind == "gue":
        ensemble = Ensemble.gue()
    elif kind == "transition":
        ensemble = Ensemble.transition(args.transition_strength)
    else:
        raise DomainError(f"ensemble must be poisson, gue or transition, got {args.ensemble!r}")
    model = ScatteringModel.from_openness(args.n_levels, args.n_channels, args.openness,
                                          ensemble, mean_spacing=args.mean_spacing)
    rec = collect_realizations(model, args.n_realizations, args.seed,
                               include_delay=True, n_threads=args.threads)
    f_hat = _enhancement_from_records(rec)
    mean_s, transmission = _mean_s_and_transmission_from_records(rec)
    delay = _delay_stats_from_records(rec)
    report = {
        "schema": f"simulate.v{_SCHEMA_VERSION}",
        "model": {
            "ensemble": kind,
            "transition_strength": ensemble.transition_strength,
            "n_levels": model.n_levels,
            "n_channels": model.n_channels,
            "coupling": model.coupling,
            "mean_spacing": model.mean_spacing,
            "energy": model.energy,
            "x": model.x,
            "openness": model.openness,
            "beta": model.beta,
        },
        "n_realizations": args.n_realizations,
        "master_seed": args.seed,
        "f_hat": {"value": f_hat.value, "std_error": f_hat.std_error},
        "mean_s_diag_re": {"value": mean_s.value, "std_error": mean_s.std_error},
        "transmission": {"value": transmission.value, "std_error": transmission.std_error},
        "mean_delay": {"value": delay.mean_q.value, "std_error": delay.mean_q.std_error},
        "varq_normalized": {"value": delay.varq_normalized.value,
                            "std_error": delay.varq_normalized.std_error},
        "f_from_varq": {"value": delay.f_from_varq.value,
                        "std_error": delay.f_from_varq.std_error},
        "unitarity_defect_max": rec.unitarity_defect_max,
    }
    comparison_failed = False
    if args.compare:
        f_ref, ref_label = _analytic_reference(args, model, cfg, args.n_calibration)
        z = (f_hat.value - f_ref) / f_hat.std_error if f_hat.std_error > 0 else math.inf
        comparison_failed = abs(z) >= args.z_threshold
        report["compare"] = {"analytic_f": f_ref, "reference": ref_label, "z": z,
                             "z_threshold": args.z_threshold,
                             "passed": not comparison_failed}
    text = json.dumps(report, indent=2) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    if args.per_realization:
        per_rows = []
        for r in range(rec.n_realizations):
            per_rows.append({
                "realization": r,
                "mean_diag_s_re": float(rec.diag_s[r].mean().real),
                "mean_diag_s_im": float(rec.diag_s[r].mean().imag),
                "elastic_power": float(np.mean(np.abs(rec.diag_s[r]) ** 2)),
                "offdiag_power": float(rec.offdiag_power[r]),
                "delay": float(rec.delay[r]),
            })
        _write_table(args.per_realization, "csv", "simulate-realizations",
                     {"master_seed": args.seed, "ensemble": kind},
                     ["realization", "mean_diag_s_re", "mean_diag_s_im",
                      "elastic_power", "offdiag_power", "delay"], per_rows)
    if comparison_failed:
        return _emit_error("statistical-comparison", EXIT_COMPARISON,
                           f"|z| = {abs(report['compare']['z']):.3f} >= "
                           f"threshold {args.z_threshold}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enhfactor",
        description="Elastic enhancement factor across the regular-to-chaotic "
                    "transition: analytics, critical points, inversion, and a "
                    "random-matrix Monte Carlo laboratory.",
    )
    parser.add_argument("--version", action="version", version=f"enhfactor {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("formfactor", help="tabulate B2(s|kappa)")
    p.add_argument("--kappa", default=None, help="chaoticity (number or 'inf')")
    p.add_argument("--grid", default=None, help="s-grid start:stop:step (default 0:2:0.05)")
    _add_common(p)
    p.set_defaults(func=_cmd_formfactor)

    p = subs.add_parser("curve", help="tabulate enhancement curves F(eta|kappa)")
    p.add_argument("--kappa-list", dest="kappa_list", default=None,
                   help="comma list of kappa values (default 0.5,5,50)")
    p.add_argument("--grid", default=None, help="eta-grid start:stop:step (default 0:12:0.25)")
    p.add_argument("--method", default=None, choices=_CURVE_METHODS)
    p.add_argument("--series-order", dest="series_order", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_curve)

    p = subs.add_parser("critical", help="critical openness and minimum enhancement")
    p.add_argument("--kappa-list", dest="kappa_list", default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_critical)

    p = subs.add_parser("invert", help="chaoticity from an observed minimum enhancement")
    p.add_argument("--fmin", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_invert)

    p = subs.add_parser("simulate", help="Monte Carlo resonance-scattering run (JSON report)")
    p.add_argument("--ensemble", default=None, choices=("poisson", "gue", "transition"))
    p.add_argument("--n-levels", dest="n_levels", type=int, default=None)
    p.add_argument("--n-channels", dest="n_channels", type=int, default=None)
    p.add_argument("--openness", type=float, default=None)
    p.add_argument("--transition-strength", dest="transition_strength", type=float, default=None)
    p.add_argument("--mean-spacing", dest="mean_spacing", type=float, default=None)
    p.add_argument("--n-realizations", dest="n_realizations", type=int, default=None)
    p.add_argument("--compare", action="store_const", const=True, default=None,
                   help="compare F_hat against the analytic value")
    p.add_argument("--z-threshold", dest="z_threshold", type=float, default=None)
    p.add_argument("--per-realization", dest="per_realization", default=None,
                   help="write per-realization CSV records to this path")
    p.add_argument("--n-calibration", dest="n_calibration", type=int, default=None,
                   help="realizations for kappa calibration (transition + --compare)")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, UnsupportedCaseError) as exc:
        return _emit_error("domain", EXIT_DOMAIN, str(exc))
    except (ConvergenceError, NoCriticalPointError, SolverError, CalibrationError) as exc:
        return _emit_error("convergence", EXIT_CONVERGENCE, str(exc))


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
