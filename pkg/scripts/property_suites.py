"""Run the randomized rewrite and channel suites at a chosen scale and seed.

    python3 scripts/property_suites.py --scale 4 --seed 17 --workers 4
"""

import argparse
import time

from qinsdel import selftest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplier on every suite's instance count")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", help="suite names (default: all)")
    args = ap.parse_args()

    start = time.perf_counter()
    results = selftest.run_all(args.seed, args.workers, args.scale, args.only)
    for r in results:
        extra = f"  contractions {r.contractions}" if r.contractions is not None else ""
        print(f"{r.name:<30} n={r.count:<6} worst={r.worst:.2e} limit={r.threshold:.0e}  {'ok' if r.passed else 'FAIL'}{extra}")
        if r.counterexample:
            print(f"    {r.counterexample}")
    print(f"{sum(r.count for r in results)} instances in {time.perf_counter() - start:.1f} s")
    raise SystemExit(0 if all(r.passed for r in results) else 1)


if __name__ == "__main__":
    main()
