"""Synthesize and verify every builtin code; print one summary row per plan."""

import argparse
import time

from ftde.code import basin_dimension, plan_from_reference, synthesize_plan
from ftde.fixtures import BUILTIN_CODES, builtin
from ftde.verify import verify_plan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--codes", nargs="*", default=sorted(BUILTIN_CODES))
    args = ap.parse_args()

    print(f"{'code':12s} {'plan':12s} {'n':>3s} {'r':>3s} {'basin':>6s} {'checks':>7s} {'max res':>9s} {'time':>7s}  result")
    for name in args.codes:
        code = builtin(name)
        for plan in (plan_from_reference(code), synthesize_plan(code)):
            t0 = time.perf_counter()
            rep = verify_plan(plan, seed=args.seed)
            dt = time.perf_counter() - t0
            dim = basin_dimension(plan.basin_Rz, plan.basin_Rx)
            res = max((c.residual for c in rep.checks if not c.expected_fail and not c.name.startswith("negative:")),
                      default=0.0)
            print(f"{name:12s} {plan.label:12s} {plan.n:3d} {plan.r:3d} {dim:6d} {len(rep.checks):7d} {res:9.1e} "
                  f"{dt:6.1f}s  {'PASS' if rep.overall else 'FAIL'}")
            for S, C in plan.ordered_pairs:
                print(f"{'':29s}S={S}  C={C}")


if __name__ == "__main__":
    main()
