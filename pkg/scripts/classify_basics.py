#!/usr/bin/env python3
"""Scan unions of basic relations for definability and preservation.

For each sampled union the script reports whether its endpoint relation
is ORD-Horn / ll-Horn / dual-ll-Horn definable and whether the two
threshold picks preserve it.  The singleton sweep doubles as a quick
sanity table for a calculus.
"""

import argparse
import random

from qreason import (DUAL_PP, PP, calculus_by_name, llhorn_definable,
                     ordhorn_definable, preserved_by, relation, relation_of)


def describe(calc, codes):
    R = relation_of(relation(calc, list(codes)))
    flags = []
    if ordhorn_definable(R) is not None:
        flags.append("ord")
    if llhorn_definable(R) is not None:
        flags.append("ll")
    if llhorn_definable(R, dual=True) is not None:
        flags.append("dual-ll")
    if preserved_by(R, PP):
        flags.append("pp")
    if preserved_by(R, DUAL_PP):
        flags.append("dual-pp")
    return flags


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--calculus", default="IA",
                    help="IA, RA, BA<p>, CDC, or DIA (default IA)")
    ap.add_argument("--unions", type=int, default=20,
                    help="random non-basic unions to sample (default 20)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    calc = calculus_by_name(args.calculus)
    codes = list(calc.codes())
    print(f"{calc.name}: {len(codes)} basic relations")
    for code in codes:
        flags = describe(calc, [code])
        print(f"  {str(code):12s} {' '.join(flags) or '-'}")

    rng = random.Random(args.seed)
    tallies = {}
    for _ in range(args.unions):
        k = rng.randint(2, min(6, len(codes)))
        flags = tuple(describe(calc, rng.sample(codes, k)))
        tallies[flags] = tallies.get(flags, 0) + 1
    print(f"\n{args.unions} random unions (2..6 codes):")
    for flags, n in sorted(tallies.items(), key=lambda kv: -kv[1]):
        print(f"  {n:4d}  {' '.join(flags) or 'no class'}")


if __name__ == "__main__":
    main()
