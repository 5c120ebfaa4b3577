"""Relative error of the computed ground-state energy against the exact level, per basis size.

    python scripts/relative_error_scan.py --lambda-min 0.505 --lambda-max 5 --steps 300
"""

import argparse
from pathlib import Path

import numpy as np

from hulthen_fss.analytic import HulthenParams, energy_level
from hulthen_fss.sweep import SweepConfig, run_sweep
from hulthen_fss.tables import write_table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda-min", type=float, default=0.505)
    ap.add_argument("--lambda-max", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=300)
    ap.add_argument("--n-list", type=int, nargs="+", default=list(range(32, 50, 2)))
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out"))
    args = ap.parse_args(argv)

    lams = np.geomspace(args.lambda_min, args.lambda_max, args.steps)
    surface = run_sweep(SweepConfig(lambda_values=tuple(lams), n_list=tuple(args.n_list)), threads=args.threads)
    rows = []
    for r in surface.rows:
        if r.ok:
            exact = energy_level(HulthenParams(r.lam))
            rows.append((r.lam, r.n_basis, abs(r.E0 - exact) / abs(exact)))
    path = write_table(args.out / "rel_error.csv", ("lambda", "n_basis", "rel_error"), rows)

    err = {(lam, n): e for lam, n, e in rows}
    probes = [lams[np.argmin(abs(lams - x))] for x in (0.51, 0.55, 1.0, 2.0, 5.0)]
    print("lambda   " + " ".join(f"N={n:<8d}" for n in args.n_list))
    for lam in probes:
        print(f"{lam:<8.4f} " + " ".join(f"{err.get((lam, n), float('nan')):<10.2e}" for n in args.n_list))
    for n in args.n_list:
        worst = max((e for (lam, m), e in err.items() if m == n and lam >= 0.55), default=float("nan"))
        print(f"N={n}: max rel error over lambda >= 0.55 is {worst:.3e}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
