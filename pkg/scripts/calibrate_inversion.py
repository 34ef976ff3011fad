"""Recover the inversion constant kappa_n numerically and compare with the closed form.

    python3 scripts/calibrate_inversion.py --n 2 3 4 5
"""
import argparse

from rankone.spherical import calibrate_inversion_constant, inversion_constant_closed_form


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    args = ap.parse_args()
    print(f"{'n':>3} {'calibrated':>22} {'closed form':>22} {'rel. diff':>10}")
    for n in args.n:
        cal = calibrate_inversion_constant(n)
        ref = inversion_constant_closed_form(n)
        print(f"{n:>3} {cal:22.16e} {ref:22.16e} {abs(cal - ref) / ref:10.2e}")


if __name__ == "__main__":
    main()
