"""Minimal-N ratio study: fit N = C d^s for every catalog weight and both solvers.

    python3 scripts/ratio_study.py --out results/ratio_fits.csv --jobs 4
"""

import argparse
import csv
import os
import sys

from stablequad import WEIGHTS, Method
from stablequad.diagnostics import ratio_study


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--d-max", type=int, default=40)
    p.add_argument("--space", choices=("linear", "log"), default="linear")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None)
    args = p.parse_args(argv)

    from stablequad.diagnostics import power_law_fit

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["method", "weight", "C", "s", "residual", "failed_degrees"])
    for method in (Method.LS, Method.NNLS):
        for name in WEIGHTS:
            rows, _ = ratio_study(name, method, range(args.d_max + 1), jobs=args.jobs)
            fit = power_law_fit([(d, n) for d, n, _ in rows if n is not None], space=args.space)
            failed = " ".join(str(d) for d, n, _ in rows if n is None)
            writer.writerow([method.value, name, f"{fit.C:.4f}", f"{fit.s:.4f}", f"{fit.residual:.4g}", failed])
            fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
