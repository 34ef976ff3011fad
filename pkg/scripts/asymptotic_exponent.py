"""Fit the decay exponent of |c(1/2 + i tau)| for several dimensions.

    python3 scripts/asymptotic_exponent.py --n 2 3 5 --points 25
"""
import argparse

import numpy as np

from rankone.harish_chandra import asymptotic_exponent_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5, 7])
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--formula", choices=("paper", "helgason"), default="paper")
    args = ap.parse_args()
    grid = np.logspace(2, 4, args.points)
    for n in args.n:
        slope = asymptotic_exponent_fit(n, grid, args.formula)
        expected = -(n - 1) / 2
        print(f"n={n}: fitted {slope:+.6f}  expected {expected:+.1f}  diff {slope - expected:+.2e}")


if __name__ == "__main__":
    main()
