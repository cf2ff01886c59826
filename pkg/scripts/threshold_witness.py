#!/usr/bin/env python3
"""Reproduce the threshold-pick violation for x = y -> u = v.

The implication relation is ORD-Horn definable yet neither threshold
pick preserves it; the scan prints the violating realization pairs in
their canonical integer rendering, smallest first.
"""

import argparse

from qreason import (DUAL_PP, PP, models_of, parse_clauses, preserved_by,
                     tractability_report, violations)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--limit", type=int, default=5,
                    help="violations to print per pick (default 5)")
    args = ap.parse_args()

    cs = parse_clauses("x != y \\/ u = v")
    R = models_of(cs, 4)
    print(f"x = y -> u = v over {R.arity} slots, {len(R.models)} models")

    for op in (PP, DUAL_PP):
        verdict = preserved_by(R, op)
        print(f"\n{op.name}: {'preserved' if verdict is True else 'violated'}")
        for i, v in enumerate(violations(R, op)):
            if i >= args.limit:
                print("  ...")
                break
            print(f"  {v.first} , {v.second} -> {v.result}")

    rep = tractability_report({"impl": R})
    print("\ntractability:", "np-hard" if rep["np_hard"] else "open/tractable")
    for line in rep["evidence"]:
        print(" ", line)


if __name__ == "__main__":
    main()
