"""Write the stability, sign, exactness and accuracy sweeps as CSV files.

Each file is produced through the CLI, so it carries its own replay header.

    python3 scripts/sweeps.py --outdir results
"""

import argparse
import os
from pathlib import Path

from stablequad.cli import main as cli

SWEEPS = {
    "stability": ["--N-range", "20:1000:10", "--method", "ls,nnls"],
    "sign": ["--N-range", "20:1000:10", "--method", "ls,nnls"],
    "exactness": ["--N-range", "20:1000:10", "--method", "ls,nnls"],
    "accuracy": ["--d-range", "2:20"],
}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--outdir", default="results")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = p.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for weight in ("x_sqrt_one_minus_x3", "cos20pix"):
        for nodes in ("eq", "sc"):
            for measure, extra in SWEEPS.items():
                path = out / f"{measure}_{weight}_{nodes}.csv"
                argv = ["sweep", "--measure", measure, "--weight", weight, "--nodes", nodes,
                        "--d", "10", "--out", str(path), "--jobs", str(args.jobs), *extra]
                code = cli(argv)
                print(f"{path}: exit {code}")


if __name__ == "__main__":
    main()
