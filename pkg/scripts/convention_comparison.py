"""Compare the derived and printed potential-matrix and normalization conventions.

For each combination, solve at a few couplings and report the relative
error against the exact level and the Hellmann-Feynman gap
|lam dE/dlam - V|. Only the derived B with the radial measure reproduces
both.

    python scripts/convention_comparison.py --n-basis 48
"""

import argparse

from hulthen_fss import validation as V


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-basis", type=int, default=48)
    ap.add_argument("--double", action="store_true", help="use the double-precision solver")
    args = ap.parse_args(argv)

    lambdas = (0.55, 1.0, 2.0, 5.0)
    print(f"N={args.n_basis}, {'double' if args.double else 'extended'} precision")
    print(f"{'B':<14}{'measure':<15}{'max rel error':>15}{'max HF gap':>14}")
    for b in ("derived", "paper_printed"):
        for measure in ("radial", "paper_printed"):
            pencil, solver = V.build_solver(args.n_basis, b, not args.double, measure=measure)
            errs = V.spectrum_errors(pencil, solver, lambdas)
            gaps = V.hellmann_feynman_gaps(pencil, solver, (0.6, 1.0, 2.0), 1e-3)
            print(f"{b:<14}{measure:<15}{max(e[3] for e in errs):>15.3e}{max(gaps):>14.3e}")


if __name__ == "__main__":
    main()
