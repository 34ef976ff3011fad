"""Run the full finite-model suite on every bundled model (or the given files).

    python3 scripts/run_finite_models.py [model.json ...] [--N 2] [--pairs 20]
"""
import argparse
import json
import sys

from rankone.finite_model import bundled_models, load_model, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("models", nargs="*")
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print the full reports")
    args = ap.parse_args()
    ok = True
    for path in args.models or bundled_models():
        model = load_model(path)
        report = run_suite(model, N=args.N, seed=args.seed, pairs=args.pairs)
        ok &= report["passed"]
        s = report["model"]
        print(f"{'PASS' if report['passed'] else 'FAIL'} {s['name']}: |G|={s['order']} |H|={s['H']} "
              f"|Gamma|={s['Gamma']} exact={s['exact']} gelfand={s['gelfand_pair']} "
              f"max dev={report['two_expansions']['max_deviation']:.1e}")
        if args.json:
            print(json.dumps(report, indent=2, sort_keys=True, default=str))
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
