"""Command-line front end.

Subcommands: solve, translate, classify, check-homotopy, compose.
Exit codes: 0 on success (sat / identity holds / all classified),
1 on a negative outcome (unsat / counterexample / unclassified relation),
2 on usage or internal errors.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .horn import ClauseError, models_of, parse_clauses
from .interp import CompositionError, HomotopyWitness, Interpretation, \
    catalog, check_homotopy_identity, compose, translate_instance
from .polycheck import tractability_report
from .relations import CalculusError, QualInstance
from .solver import BRUTEFORCE_SLOT_CAP, SolveError, homotopy_samples, \
    parse_instance, render_instance, report_json, solve


def _read_instance(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise SolveError(str(e)) from e
    return parse_instance(text)


def _print_report(report, as_json: bool) -> int:
    if as_json:
        print(report_json(report))
        return 0 if report.satisfiable else 1
    print(f"satisfiable: {'yes' if report.satisfiable else 'no'}")
    print(f"strategy: {report.strategy}")
    if report.witness is not None:
        for var, val in sorted(report.witness.items()):
            if hasattr(val, "endpoints"):
                ends = ", ".join(str(e) for e in val.endpoints())
                print(f"  {var} = [{ends}]")
            else:
                print(f"  {var} = {val}")
    print(f"stats: nodes={report.nodes} firings={report.firings} "
          f"ms={report.ms:.1f}")
    return 0 if report.satisfiable else 1


def _cmd_solve(args) -> int:
    inst = _read_instance(args.file)
    report = solve(inst, args.method, max_slots=args.max_slots, seed=args.seed)
    return _print_report(report, args.json)


def _instance_doc(inst):
    if isinstance(inst, QualInstance):
        return {
            "kind": inst.calculus.name,
            "variables": list(inst.variables),
            "forw": list(inst.forw_vars),
            "constraints": [
                [x, [list(c) if isinstance(c, tuple) else c
                     for c in sorted(rel.codes())], y]
                for x, rel, y in inst.constraints],
        }
    return {
        "kind": "POINT",
        "variables": list(inst.variables),
        "atoms": [[a.lhs, a.op, a.rhs] for a in inst.atoms],
        "grouped": [
            {"scope": list(scope),
             "groups": [list(g) for g in rel.groups],
             "models": sorted([list(w.ranks) for w in model]
                              for model in rel.models)}
            for scope, rel in inst.grouped],
    }


def _cmd_translate(args) -> int:
    inst = _read_instance(args.file)
    entry = catalog().get(args.via)
    if not isinstance(entry, Interpretation):
        raise SolveError(f"no interpretation named {args.via!r} in the catalog")
    out = translate_instance(inst, entry)
    if args.json:
        print(json.dumps(_instance_doc(out)))
    else:
        sys.stdout.write(render_instance(out))
    return 0


def _cmd_classify(args) -> int:
    relations = {}
    for i, text in enumerate(args.relation):
        cs = parse_clauses(text.replace(";", "\n"))
        if not cs.variables:
            raise SolveError(f"relation {i} constrains no variables")
        relations[f"R{i}"] = models_of(cs, len(cs.variables))
    report = tractability_report(relations)
    all_classified = all(e["classes"] for e in report["relations"])
    if args.json:
        print(json.dumps(report))
        return 0 if all_classified else 1
    for entry in report["relations"]:
        classes = ", ".join(entry["classes"]) if entry["classes"] else "none"
        parts = [f"{entry['id']}: arity {entry['arity']}, "
                 f"{entry['model_count']} models, classes: {classes}"]
        for op in ("pp", "dual_pp"):
            pres = entry["preservation"][op]
            if not pres["checked"]:
                parts.append(f"{op} unchecked")
            elif pres["preserved"]:
                parts.append(f"{op} preserved")
            else:
                parts.append(f"{op} violated")
        print("; ".join(parts))
    for line in report["evidence"]:
        print(line)
    print(f"np-hard: {'yes' if report['np_hard'] else 'no'}")
    return 0 if all_classified else 1


def _cmd_check_homotopy(args) -> int:
    entry = catalog().get(args.witness)
    if not isinstance(entry, HomotopyWitness):
        raise SolveError(f"no homotopy witness named {args.witness!r} "
                         f"in the catalog")
    rng = random.Random(args.seed)
    result = check_homotopy_identity(
        entry, homotopy_samples(entry, args.samples, rng))
    if args.json:
        doc = {
            "witness": args.witness,
            "checked": result.checked,
            "identity": bool(result),
            "seed": args.seed,
        }
        if result.counterexample is not None:
            sample, reason, _ = result.counterexample
            doc["counterexample"] = {"sample": repr(sample), "reason": reason}
        print(json.dumps(doc))
        return 0 if result else 1
    print(f"checked {result.checked} in-domain samples")
    if result:
        print("identity holds on every checked sample")
        return 0
    sample, reason, _ = result.counterexample
    print(f"counterexample: {sample!r}: {reason}")
    return 1


def _cmd_compose(args) -> int:
    cat = catalog()
    outer = cat.get(args.outer)
    if not isinstance(outer, Interpretation):
        raise SolveError(f"no interpretation named {args.outer!r} in the catalog")
    inners = []
    for name in args.inner:
        entry = cat.get(name)
        if not isinstance(entry, Interpretation):
            raise SolveError(f"no interpretation named {name!r} in the catalog")
        inners.append(entry)
    theta = None
    if args.witness is not None:
        w = cat.get(args.witness)
        if not isinstance(w, HomotopyWitness):
            raise SolveError(f"no homotopy witness named {args.witness!r} "
                             f"in the catalog")
        theta = w.witness_formula
    composed = compose(outer, tuple(inners), identity_witness=theta,
                       name=args.name)
    doc = {
        "name": composed.name,
        "source": composed.source,
        "target": composed.target,
        "dimension": composed.dimension,
        "codes": sorted(str(c) for c in composed.relation_formulas),
        "note": composed.note,
    }
    if args.json:
        print(json.dumps(doc))
    else:
        print(f"{doc['name']}: interprets {doc['target']} in {doc['source']}, "
              f"dimension {doc['dimension']}")
        print(f"codes: {', '.join(doc['codes'])}")
        if doc["note"]:
            print(f"note: {doc['note']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qreason",
        description="qualitative constraint solving over points, intervals, "
                    "blocks, and directions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide an instance file")
    p.add_argument("file")
    p.add_argument("--method", default="auto",
                   help="auto, bruteforce, backtracking, ordhorn, "
                        "or translate:<catalog-name>")
    p.add_argument("--json", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-slots", type=int, default=BRUTEFORCE_SLOT_CAP,
                   help="brute-force slot cap")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("translate",
                       help="rewrite an instance through an interpretation")
    p.add_argument("file")
    p.add_argument("--via", required=True, help="catalog interpretation name")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("classify",
                       help="definability classes and threshold-operation "
                            "preservation for clause-defined relations")
    p.add_argument("--relation", action="append", required=True,
                   metavar="CLAUSES", help="clause text; ; separates clauses")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("check-homotopy",
                       help="sample a catalog homotopy witness")
    p.add_argument("witness", help="catalog name, e.g. ia.homotopy")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check_homotopy)

    p = sub.add_parser("compose", help="compose catalog interpretations")
    p.add_argument("outer")
    p.add_argument("inner", nargs="+")
    p.add_argument("--name", default=None)
    p.add_argument("--witness", default=None,
                   help="homotopy witness supplying the identity formula "
                        "for non-coordinatewise domains")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_compose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SolveError, ClauseError, CalculusError, CompositionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
