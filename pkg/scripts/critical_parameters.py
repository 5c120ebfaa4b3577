"""Critical-point estimates from a dense energy surface, with diagnostics.

Runs (or loads) the default sweep, performs the shifted three-point crossing
analysis, and reports why pairs fail when they do: where Gamma is defined,
and how often the N-differences of E and V alternate in sign. With
``--two-point`` it also runs the two-size variant

    Delta(lam; N, N') = ln(X_N / X_N') / ln(N'/N)

which needs no second difference and so survives where the three-point
ratios are undefined. With ``--unbound LO HI`` it re-solves the window
keeping the lowest eigenvalue even when it is not negative, and repeats
the three-point analysis on that surface.

    python scripts/critical_parameters.py --surface out/surface.csv --two-point
"""

from __future__ import annotations

import argparse
import json
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from hulthen_fss.basis import BasisSpec, build_decay_rates
from hulthen_fss.eigensolver import ExtendedSolver
from hulthen_fss.errors import BracketError, UndefinedPoint
from hulthen_fss.fss import analyze, consecutive_triples, extrapolate, find_curve_crossing, gamma_curve
from hulthen_fss.pencil import assemble
from hulthen_fss.sweep import (
    EnergySurface,
    SurfaceRow,
    SweepConfig,
    load_surface,
    potential_expectation,
    run_sweep,
    save_surface,
)


def difference_signs(surface, triple, column):
    """Fraction of common bound-state lambdas where the two N-differences agree in sign."""
    n1, n2, n3 = triple.sizes
    rows = {n: dict(zip(*surface.series(n, column))) for n in triple.sizes}
    common = sorted(set(rows[n1]) & set(rows[n2]) & set(rows[n3]))
    if not common:
        return 0, 0.0
    agree = sum((rows[n2][x] - rows[n1][x]) * (rows[n3][x] - rows[n2][x]) > 0 for x in common)
    return len(common), agree / len(common)


def diagnose(surface, bracket):
    lo, hi = bracket
    for t in consecutive_triples(surface.n_list):
        lam, g = gamma_curve(surface, t, [x for x in surface.lambdas() if lo <= x <= hi])
        n, fe = difference_signs(surface, t, "E0")
        _, fv = difference_signs(surface, t, "V")
        span = f"[{lam.min():.6f}, {lam.max():.6f}]" if lam.size else "-"
        med = f"{np.median(g):.4g}" if g.size else "-"
        print(f"  triple {t.sizes}: Gamma defined at {lam.size:4d} points in {span}, median {med}; "
              f"same-sign differences E {fe:.0%} V {fv:.0%} of {n}")


def two_point_analysis(surface, bracket, min_lambda):
    """Crossings of Gamma(N, N+2) built from the two-size Delta."""
    sizes = surface.n_list
    curves = {}
    for n in sizes:
        lam, e = surface.series(n, "E0")
        _, v = surface.series(n, "V")
        keep = lam >= min_lambda
        curves[n] = (PchipInterpolator(lam[keep], e[keep], extrapolate=False),
                     PchipInterpolator(lam[keep], v[keep], extrapolate=False))

    def gamma(n1, n2):
        k = math.log(n2 / n1)

        def f(x):
            e1, v1 = (float(c(x)) for c in curves[n1])
            e2, v2 = (float(c(x)) for c in curves[n2])
            if not all(map(math.isfinite, (e1, e2, v1, v2))) or min(e1 / e2, v1 / v2) <= 0:
                raise UndefinedPoint("no data")
            d_e, d_v = math.log(e1 / e2) / k, math.log(v1 / v2) / k
            if d_e == d_v:
                raise UndefinedPoint("Gamma pole")
            return d_e / (d_e - d_v), d_e

        return f

    out = []
    lo = max(bracket[0], min_lambda)
    samples = [x for x in surface.lambdas() if lo <= x <= bracket[1]]
    pairs = list(zip(sizes, sizes[1:]))
    for (a, b), (c, d) in zip(pairs, pairs[1:]):
        ga, gb = gamma(a, b), gamma(c, d)
        try:
            lam_n, alpha_n = find_curve_crossing(lambda x: ga(x)[0], lambda x: gb(x)[0], (lo, bracket[1]), samples)
        except BracketError as exc:
            print(f"  two-point {a}-{c}: {exc}")
            continue
        nu_n = alpha_n / ga(lam_n)[1]
        out.append((a, lam_n, alpha_n, nu_n))
        print(f"  two-point {a}-{c}: lambda_N={lam_n:.8f} alpha_N={alpha_n:.5f} nu_N={nu_n:.5f}")
    if len(out) >= 2:
        for j, name in ((1, "lambda_c"), (2, "alpha"), (3, "nu")):
            v, s, r = extrapolate([(row[0], row[j]) for row in out])
            print(f"  two-point {name} = {v:.6f} (slope {s:.4g}, rms {r:.2e})")
    return out


def unbound_surface(n_list, lambdas):
    """Lowest eigenpair at every point, whatever the sign of its energy."""
    rows = []
    for n in n_list:
        pencil = assemble(build_decay_rates(BasisSpec(n)), precision_bits=128)
        solver = ExtendedSolver(pencil)
        for lam in lambdas:
            st = solver.lowest(float(lam), require_bound=False)
            rows.append(SurfaceRow(float(lam), n, st.energy, potential_expectation(st, pencil, float(lam)), st.residual))
    return EnergySurface(tuple(rows))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--surface", type=Path, help="existing surface file; otherwise the default sweep is run")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--bracket", type=float, nargs=2, default=(0.49, 0.55))
    ap.add_argument("--two-point", action="store_true")
    ap.add_argument("--min-lambda", type=float, default=0.5,
                    help="lower cut for the two-point curves (skips the first bound rows)")
    ap.add_argument("--unbound", type=float, nargs=2, metavar=("LO", "HI"),
                    help="re-solve [LO, HI] (201 points) keeping non-negative lowest eigenvalues")
    args = ap.parse_args(argv)

    if args.surface:
        surface = load_surface(args.surface)
    else:
        surface = run_sweep(SweepConfig(), threads=args.threads)
        save_surface(surface, args.out / "surface.csv")
    counts = {s: sum(r.status == s for r in surface.rows) for s in ("ok", "no_bound_state", "failed")}
    first = min(r.lam for r in surface.rows if r.ok)
    print(f"surface: {len(surface)} rows {counts}; first bound lambda {first:.6f}")

    est = analyze(surface, bracket=tuple(args.bracket))
    print("three-point analysis:")
    for c in est.crossings:
        print(f"  {c.pair}: lambda_N={c.lambda_n:.8f} alpha_N={c.alpha_n:.5f} nu_N={c.nu_n}")
    for pair, why in est.failures:
        print(f"  {pair}: {why}")
    print(f"  estimate lambda_c={est.lambda_c} alpha={est.alpha} nu={est.nu}")
    diagnose(surface, args.bracket)

    result = {"three_point": {"lambda_c": est.lambda_c, "alpha": est.alpha, "nu": est.nu,
                              "crossings": len(est.crossings), "failures": [list(f) for f in est.failures]}}
    if args.two_point:
        print("two-point analysis:")
        rows = two_point_analysis(surface, args.bracket, args.min_lambda)
        result["two_point"] = [dict(zip(("n_eff", "lambda_n", "alpha_n", "nu_n"), r)) for r in rows]
    if args.unbound:
        lo, hi = args.unbound
        ub = unbound_surface(surface.n_list, np.linspace(lo, hi, 201))
        est_u = analyze(ub, bracket=(lo, hi))
        print("three-point analysis including unbound lowest states:")
        for c in est_u.crossings:
            print(f"  {c.pair}: lambda_N={c.lambda_n:.8f} alpha_N={c.alpha_n:.5f} nu_N={c.nu_n}")
        for pair, why in est_u.failures:
            print(f"  {pair}: {why}")
        for lam in (lo, 0.5, hi):
            lam = min(ub.lambdas(), key=lambda x: abs(x - lam))
            print(f"  E(lambda={lam:.5f}) over N: " + " ".join(f"{ub.row(lam, n).E0:.3e}" for n in ub.n_list))
        result["unbound"] = {"lambda_c": est_u.lambda_c, "alpha": est_u.alpha, "nu": est_u.nu,
                             "crossings": len(est_u.crossings)}
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "critical_parameters.json").write_text(json.dumps(result, indent=2) + "\n")


if __name__ == "__main__":
    main()
