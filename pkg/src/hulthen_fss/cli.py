"""Command-line entry point: hulthen-fss {rates,sweep,fss,collapse,validate}.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from hulthen_fss import __version__, tables
from hulthen_fss.analytic import HulthenParams, energy_level
from hulthen_fss.basis import BasisSpec, build_decay_rates
from hulthen_fss.config import REFERENCE_ALPHA, REFERENCE_LAMBDA_C, REFERENCE_NU, RunConfig, load_config, surface_path, with_overrides
from hulthen_fss.errors import ConfigError, HulthenError, SurfaceParseError
from hulthen_fss.fss import analyze, consecutive_triples, data_collapse, gamma_curve
from hulthen_fss.sweep import load_surface, run_sweep, save_surface

log = logging.getLogger("hulthen_fss")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class NumericalFailure(Exception):
    pass


def _meta(cfg: RunConfig, **extra) -> dict:
    # where and how fast a run executes does not change its numbers
    desc = {k: v for k, v in cfg.describe().items() if k not in ("output_dir", "threads")}
    out = {"config_hash": tables.config_hash(desc)}
    out.update(extra)
    return out


def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.output_dir) / name


def cmd_rates(cfg: RunConfig) -> int:
    rows = []
    for n in cfg.sweep.n_list:
        grid = build_decay_rates(BasisSpec(n, cfg.sweep.d_s, cfg.sweep.d_e))
        rows.extend((n, k + 1, float(b)) for k, b in enumerate(grid.rates))
    path = tables.write_table(_out(cfg, "rates.csv"), ("n_basis", "n", "beta"), rows, _meta(cfg))
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def _sweep(cfg: RunConfig):
    t0 = time.perf_counter()
    surface = run_sweep(cfg.sweep_config(), threads=cfg.threads)
    log.info("sweep of %d points took %.1f s", len(surface), time.perf_counter() - t0)
    return surface


def cmd_sweep(cfg: RunConfig) -> int:
    surface = _sweep(cfg)
    path = save_surface(surface, _out(cfg, "surface.csv"), _meta(cfg))
    err_rows = []
    for r in surface.rows:
        if not r.ok:
            continue
        exact = energy_level(HulthenParams(r.lam, a=cfg.sweep.a))
        rel = abs(r.E0 - exact) / abs(exact) if exact != 0 else None
        err_rows.append((r.lam, r.n_basis, r.E0, exact, rel))
    epath = tables.write_table(_out(cfg, "surface_errors.csv"),
                               ("lambda", "n_basis", "E0", "E_exact", "rel_error"), err_rows, _meta(cfg))
    counts = {s: sum(r.status == s for r in surface.rows) for s in ("ok", "no_bound_state", "failed")}
    print(f"wrote {path} and {epath}: {counts}")
    if counts["failed"]:
        print(f"{counts['failed']} points failed (see log)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _surface(cfg: RunConfig):
    path = surface_path(cfg)
    if path.exists():
        return load_surface(path)
    log.info("no surface at %s; running the sweep", path)
    surface = _sweep(cfg)
    save_surface(surface, path, _meta(cfg))
    return surface


def cmd_fss(cfg: RunConfig) -> int:
    surface = _surface(cfg)
    f = cfg.fss
    bracket = (f.bracket_lo, f.bracket_hi)
    triples = consecutive_triples(surface.n_list)
    in_bracket = [lam for lam in surface.lambdas() if bracket[0] <= lam <= bracket[1]]
    g_rows = []
    for t in triples:
        lam, g = gamma_curve(surface, t, in_bracket)
        g_rows.extend((float(a), t.label, float(b)) for a, b in zip(lam, g))
    meta = _meta(cfg, triples="N:N+2:N+4")
    gpath = tables.write_table(_out(cfg, "gamma.csv"), ("lambda", "triple_label", "gamma"), g_rows, meta)
    est = analyze(surface, bracket=bracket, tol=f.bisection_tol)
    c_rows = [(c.pair, c.lambda_n, c.alpha_n, c.nu_n) for c in est.crossings]
    cpath = tables.write_table(_out(cfg, "crossings.csv"), ("triple_pair", "lambda_N", "alpha_N", "nu_N"), c_rows, meta)
    summary = {
        "lambda_c": est.lambda_c,
        "alpha": est.alpha,
        "nu": est.nu,
        "fits": est.fits,
        "crossings": len(est.crossings),
        "failed_pairs": [{"pair": p, "reason": r} for p, r in est.failures],
        "reference": {"lambda_c": REFERENCE_LAMBDA_C, "alpha": REFERENCE_ALPHA, "nu": REFERENCE_NU},
    }
    spath = _out(cfg, "fss_summary.json")
    spath.write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {gpath}, {cpath}, {spath}")
    print(f"lambda_c={est.lambda_c} alpha={est.alpha} nu={est.nu} from {len(est.crossings)} crossings")
    if est.lambda_c is None:
        print("fewer than two crossings; no extrapolation", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_collapse(cfg: RunConfig) -> int:
    surface = _surface(cfg)
    f = cfg.fss
    results = {}
    for conv in ("paper_printed", "standard"):
        try:
            results[conv] = data_collapse(surface, f.collapse_lambda_c, f.collapse_alpha, f.collapse_nu,
                                          tuple(f.collapse_window), conv)
        except ValueError as exc:
            print(f"collapse failed: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    main = results[f.collapse_sign_convention]
    rows = [(n, float(x), float(y)) for n, (xs, ys) in sorted(main.curves.items()) for x, y in zip(xs, ys)]
    path = tables.write_table(_out(cfg, "collapse.csv"), ("n_basis", "x_scaled", "y_scaled"), rows,
                              _meta(cfg, convention=main.convention))
    summary = {
        "estimates": {"lambda_c": f.collapse_lambda_c, "alpha": f.collapse_alpha, "nu": f.collapse_nu},
        "window": list(f.collapse_window),
        "convention": main.convention,
        "spread": {k: v.spread for k, v in results.items()},
    }
    _out(cfg, "collapse_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {path}; spread " + ", ".join(f"{k}={v.spread:.3e}" for k, v in results.items()))
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    from hulthen_fss import validation as V

    num = cfg.numerics
    n = max(cfg.sweep.n_list)
    d_s, d_e = cfg.sweep.d_s, cfg.sweep.d_e
    checks = [
        V.check_elements(num.b_element_convention, points_per_panel=num.quadrature_points_per_panel),
        V.check_series(points_per_panel=num.quadrature_points_per_panel),
        V.check_ode(),
    ]
    pencil, solver = V.build_solver(n, num.b_element_convention, num.extended_precision, num.precision_bits,
                                    num.measure, d_s, d_e)
    checks.append(V.check_conditioning(pencil))
    checks.append(V.check_spectrum(pencil, solver))
    for fn, kw in ((V.check_residuals, {"rtol": num.eigen_residual_tol}), (V.check_normalization, {}),
                   (V.check_hellmann_feynman, {})):
        try:
            checks.append(fn(pencil, solver, **kw))
        except HulthenError as exc:
            checks.append(V.CheckResult(fn.__name__, False, float("inf"), 0.0, str(exc)))
    lines = [c.line() for c in checks]
    # both B conventions side by side, whichever one is configured
    other = "paper_printed" if num.b_element_convention == "derived" else "derived"
    p2, s2 = V.build_solver(n, other, num.extended_precision, num.precision_bits, num.measure, d_s, d_e)
    lines.append(f"INFO  comparison spectrum: {V.check_spectrum(p2, s2).line()}")
    report = "\n".join(lines) + "\n"
    path = _out(cfg, "validate.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report)
    print(report, end="")
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed; report at {path}")
    return EXIT_VALIDATION if failed else EXIT_OK


COMMANDS = {"rates": cmd_rates, "sweep": cmd_sweep, "fss": cmd_fss, "collapse": cmd_collapse, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hulthen-fss", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--threads", type=int, help="worker processes for the sweep, 0 = one per CPU")
    p.add_argument("--precision", choices=("double", "extended"))
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = with_overrides(cfg, args.out, args.threads, args.precision)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except SurfaceParseError as exc:
        print(f"bad surface file: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HulthenError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
