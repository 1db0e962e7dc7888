"""Toric-code encoder at growing lattice sizes: schedule depth and tableau checks."""

import argparse
import time

import numpy as np

from ftde.tableau import check_tableau_encoding
from ftde.toric import check_quasi_locality, parallel_schedule, toric_neighborhoods, toric_plan
from ftde.verify import check_E1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="*", default=[2, 3, 4, 5, 6, 7, 8])
    ap.add_argument("--uploads", nargs="*", default=["00", "0+", "+0", "++", "0-", "1+"])
    args = ap.parse_args()

    print(f"{'L':>3s} {'n':>4s} {'maps':>5s} {'depth':>6s} {'E1':>4s} {'local':>6s} {'tableau':>8s} {'time':>7s}")
    depths = []
    for L in args.sizes:
        t0 = time.perf_counter()
        lat, plan = toric_plan(L)
        depth = len(parallel_schedule(plan.ordered_pairs))
        depths.append(depth)
        e1 = check_E1(plan, ordered=True).overall
        local = check_quasi_locality(plan, toric_neighborhoods(lat)).overall
        passed = sum(check_tableau_encoding(plan, up)[0].overall for up in args.uploads)
        print(f"{L:3d} {plan.n:4d} {plan.r:5d} {depth:6d} {str(e1):>4s} {str(local):>6s} "
              f"{passed:>4d}/{len(args.uploads):<3d} {time.perf_counter() - t0:6.2f}s")
    if len(args.sizes) > 1:
        a, b = np.polyfit(args.sizes, depths, 1)
        print(f"depth fit: {a:.3f} L {b:+.3f}")


if __name__ == "__main__":
    main()
