"""Instance files, solving strategies, and witness extraction.

The instance grammar is line-oriented with # comments:

    algebra <IA|RA|BA<p>|CDC|DIA|POINT>
    vars <name> <name> ...
    X { code code ... } Y          # qualitative constraint; BA codes (c1,...,cp)
    forw X                         # DIA only
    a < b                          # POINT: raw atom or any clause line
    x != y \\/ u = v
    rel <v1> ... <vk> : groups [i ...]... ; models [r ...]..., ...

rel lines carry grouped point relations that have no clause rendering
(translated multi-code constraints); groups list slot indices, each model
lists one rank bracket per group.
"""
from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import __version__
from .horn import ClauseError, ClauseSet, LLClause, ORDClause, models_of, \
    ordhorn_definable, parse_clause, propagate_ord
from .interp import catalog, translate_instance
from .points import RANK_MATRIX_CAP, ConjunctiveStore, PointInstance, \
    PointRelation, WeakOrder, conjunction_satisfiable, iter_weak_orders, \
    rank_matrix, relation_of
from .relations import CalculusError, OrderAtom, QualInstance, \
    calculus_by_name, relation

BRUTEFORCE_SLOT_CAP = 10

# auto only attempts the clause route when every grouped constraint is this
# small; definability checks enumerate all weak orders on the scope, which
# is prohibitive at the 8-slot scopes block constraints produce
ORD_AUTO_CAP = 6

POINT_ALGEBRA = "POINT"


class SolveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# parsing and rendering


_CONSTRAINT_RE = re.compile(r"^(\S+)\s*\{([^{}]*)\}\s*(\S+)$")
_REL_RE = re.compile(r"^rel\s+(.*?)\s*:\s*groups\s+(.*?)\s*;\s*models\s+(.*)$")
_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")


def _split_codes(body: str, lineno: int, calc) -> list:
    if "(" in body:
        tuples = re.findall(r"\(([^()]*)\)", body)
        leftover = re.sub(r"\([^()]*\)", "", body).strip()
        if leftover:
            raise SolveError(f"line {lineno}: stray text {leftover!r} in codes")
        return [tuple(c.strip() for c in t.split(",")) for t in tuples]
    return body.split()


def _parse_rel_line(line: str, lineno: int, declared: set):
    m = _REL_RE.match(line)
    if not m:
        raise SolveError(f"line {lineno}: malformed rel line")
    scope = tuple(m.group(1).split())
    for v in scope:
        if v not in declared:
            raise SolveError(f"line {lineno}: undeclared variable {v!r}")
    groups = tuple(tuple(int(i) for i in b.split())
                   for b in _BRACKET_RE.findall(m.group(2)))
    try:
        models = []
        for part in m.group(3).split(","):
            ranks = [tuple(int(r) for r in b.split())
                     for b in _BRACKET_RE.findall(part)]
            if len(ranks) != len(groups):
                raise ValueError("model group count mismatch")
            models.append(tuple(WeakOrder(r) for r in ranks))
        rel = PointRelation(len(scope), groups, frozenset(models))
    except ValueError as e:
        raise SolveError(f"line {lineno}: {e}") from e
    return scope, rel


def parse_instance(text: str) -> Union[QualInstance, PointInstance]:
    """Parse the grammar above; error messages carry line numbers."""
    calc = None
    algebra_seen = False
    variables: list[str] = []
    constraints = []
    forw = []
    atoms = []
    grouped = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "algebra":
            if algebra_seen:
                raise SolveError(f"line {lineno}: algebra declared twice")
            algebra_seen = True
            name = rest.strip()
            if name == POINT_ALGEBRA:
                calc = None
            else:
                try:
                    calc = calculus_by_name(name)
                except CalculusError as e:
                    raise SolveError(f"line {lineno}: {e}") from e
            continue
        if not algebra_seen:
            raise SolveError(f"line {lineno}: algebra must come first")
        if head == "vars":
            names = rest.split()
            if not names:
                raise SolveError(f"line {lineno}: empty vars line")
            variables.extend(names)
            continue
        if head == "forw":
            if calc is None or calc.name != "DIA":
                raise SolveError(f"line {lineno}: forw is a DIA constraint")
            v = rest.strip()
            if v not in variables:
                raise SolveError(f"line {lineno}: undeclared variable {v!r}")
            forw.append(v)
            continue
        if calc is not None:
            m = _CONSTRAINT_RE.match(line)
            if not m:
                raise SolveError(f"line {lineno}: expected `X {{ codes }} Y`")
            x, body, y = m.group(1), m.group(2), m.group(3)
            for v in (x, y):
                if v not in variables:
                    raise SolveError(f"line {lineno}: undeclared variable {v!r}")
            codes = _split_codes(body, lineno, calc)
            if not codes:
                raise SolveError(f"line {lineno}: empty constraint")
            for c in codes:
                if not calc.is_code(c):
                    raise SolveError(f"line {lineno}: unknown {calc.name} code {c!r}")
            constraints.append((x, relation(calc, codes), y))
            continue
        # POINT body: rel lines, else clause syntax
        if head == "rel":
            grouped.append(_parse_rel_line(line, lineno, set(variables)))
            continue
        try:
            clause = parse_clause(line, lineno)
        except ClauseError as e:
            raise SolveError(str(e)) from e
        for v in clause.variables():
            if v not in variables:
                raise SolveError(f"line {lineno}: undeclared variable {v!r}")
        if isinstance(clause, ORDClause) and clause.head and not clause.neq_literals:
            atoms.append(OrderAtom(*clause.head))
        elif (isinstance(clause, ORDClause) and clause.head is None
              and len(clause.neq_literals) == 1):
            u, v = clause.neq_literals[0]
            atoms.append(OrderAtom(u, "!=", v))
        else:
            scope = tuple(sorted(clause.variables()))
            if len(scope) > RANK_MATRIX_CAP:
                raise SolveError(
                    f"line {lineno}: clause over {len(scope)} variables "
                    f"exceeds the {RANK_MATRIX_CAP}-slot model table")
            rel = models_of(ClauseSet(scope, (clause,)), len(scope))
            grouped.append((scope, rel))
    if not algebra_seen:
        raise SolveError("no algebra line")
    try:
        if calc is None:
            return PointInstance(tuple(variables), tuple(atoms), tuple(grouped))
        return QualInstance(calc, tuple(variables), tuple(constraints),
                            tuple(forw))
    except (ValueError, CalculusError) as e:
        raise SolveError(str(e)) from e


def render_instance(inst: Union[QualInstance, PointInstance]) -> str:
    """Inverse of parse_instance, up to comment and whitespace loss."""
    lines = []
    if isinstance(inst, QualInstance):
        lines.append(f"algebra {inst.calculus.name}")
        lines.append("vars " + " ".join(inst.variables))
        for v in inst.forw_vars:
            lines.append(f"forw {v}")
        for x, rel, y in inst.constraints:
            codes = sorted(rel.codes())
            if codes and isinstance(codes[0], tuple):
                body = " ".join("(" + ",".join(c) + ")" for c in codes)
            else:
                body = " ".join(codes)
            lines.append(f"{x} {{ {body} }} {y}")
        return "\n".join(lines) + "\n"
    if inst.constants:
        raise SolveError("constants have no text form")
    lines.append(f"algebra {POINT_ALGEBRA}")
    lines.append("vars " + " ".join(inst.variables))
    for a in inst.atoms:
        lines.append(f"{a.lhs} {a.op} {a.rhs}")
    for scope, rel in inst.grouped:
        groups = "".join("[" + " ".join(str(i) for i in g) + "]"
                         for g in rel.groups)
        models = ", ".join(
            "".join("[" + " ".join(str(r) for r in w.ranks) + "]"
                    for w in model)
            for model in sorted(rel.models,
                                key=lambda m: tuple(w.ranks for w in m)))
        lines.append(f"rel {' '.join(scope)} : groups {groups} ; models {models}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# point-level encoding of qualitative instances


def point_encoding(inst: QualInstance) -> PointInstance:
    """Endpoint-slot CSP with one grouped constraint per qualitative
    constraint.  This is the plain slot encoding, independent of the
    interpretation catalog."""
    calc = inst.calculus
    variables = [s for v in inst.variables for s in calc.slots_for(v)]
    atoms = []
    for v in inst.variables:
        atoms.extend(calc.domain_atoms(v))
    for v in inst.forw_vars:
        slots = calc.slots_for(v)
        atoms.append(OrderAtom(slots[0], "<", slots[1]))
    grouped = []
    for x, rel, y in inst.constraints:
        scope = calc.slots_for(x) + calc.slots_for(y)
        grouped.append((scope, relation_of(rel)))
    return PointInstance(tuple(variables), tuple(atoms), tuple(grouped))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class SolveReport:
    satisfiable: bool
    witness: Optional[dict]
    strategy: str
    nodes: int
    firings: int
    ms: float
    seed: Optional[int] = None

    def witness_json(self):
        if self.witness is None:
            return None
        out = {}
        for var, val in self.witness.items():
            if hasattr(val, "endpoints"):
                out[var] = [int(e) for e in val.endpoints()]
            else:
                out[var] = int(val)
        return out


def report_json(report: SolveReport) -> str:
    """Stable-schema JSON; ms is wall-clock and excluded from determinism."""
    doc = {
        "satisfiable": report.satisfiable,
        "witness": report.witness_json(),
        "strategy": report.strategy,
        "stats": {"nodes": report.nodes, "firings": report.firings,
                  "ms": round(report.ms, 3)},
        "seed": report.seed,
        "version": __version__,
    }
    return json.dumps(doc)


# ---------------------------------------------------------------------------
# point-instance strategies


def _check_no_constants(pinst: PointInstance) -> None:
    if pinst.constants:
        raise SolveError("constant bindings are not supported by the solver")
    for a in pinst.atoms:
        if not isinstance(a.lhs, str) or not isinstance(a.rhs, str):
            raise SolveError("constant terms in atoms are not supported")


def _atoms_mask(M: np.ndarray, index: dict, atoms) -> np.ndarray:
    mask = np.ones(len(M), dtype=bool)
    for a in atoms:
        lhs, rhs = M[:, index[a.lhs]], M[:, index[a.rhs]]
        if a.op == "<":
            mask &= lhs < rhs
        elif a.op == "<=":
            mask &= lhs <= rhs
        elif a.op == "=":
            mask &= lhs == rhs
        elif a.op == "!=":
            mask &= lhs != rhs
        else:
            raise SolveError(f"unsupported atom operator {a.op!r}")
    return mask


def _grouped_mask(M: np.ndarray, index: dict, scope, rel: PointRelation) -> np.ndarray:
    cols = [index[v] for v in scope]
    total = np.zeros(len(M), dtype=bool)
    for model in rel.models:
        m = np.ones(len(M), dtype=bool)
        for w, g in zip(model, rel.groups):
            gc = [cols[i] for i in g]
            for a in range(len(gc)):
                for b in range(a + 1, len(gc)):
                    if w.ranks[a] == w.ranks[b]:
                        m &= M[:, gc[a]] == M[:, gc[b]]
                    elif w.ranks[a] < w.ranks[b]:
                        m &= M[:, gc[a]] < M[:, gc[b]]
                    else:
                        m &= M[:, gc[a]] > M[:, gc[b]]
        total |= m
        if total.all():
            break
    return total


def _point_bruteforce(pinst: PointInstance, max_slots: int):
    n = len(pinst.variables)
    if n > max_slots:
        raise SolveError(f"{n} slots exceed the brute-force cap {max_slots}")
    index = {v: i for i, v in enumerate(pinst.variables)}

    def evaluate(M):
        mask = _atoms_mask(M, index, pinst.atoms)
        for scope, rel in pinst.grouped:
            if not mask.any():
                break
            mask &= _grouped_mask(M, index, scope, rel)
        return mask

    if n <= RANK_MATRIX_CAP:
        M = rank_matrix(n)
        mask = evaluate(M)
        hits = np.flatnonzero(mask)
        nodes = len(M)
        row = M[hits[0]] if len(hits) else None
    else:
        # above the table cap: stream weak orders in chunks
        nodes, row = 0, None
        chunk = []
        for w in iter_weak_orders(n):
            chunk.append(w.ranks)
            if len(chunk) == 65536:
                M = np.array(chunk, dtype=np.int64)
                nodes += len(M)
                hits = np.flatnonzero(evaluate(M))
                if len(hits):
                    row = M[hits[0]]
                    break
                chunk = []
        if row is None and chunk:
            M = np.array(chunk, dtype=np.int64)
            nodes += len(M)
            hits = np.flatnonzero(evaluate(M))
            if len(hits):
                row = M[hits[0]]
    if row is None:
        return False, None, nodes
    witness = {v: int(row[i]) for i, v in enumerate(pinst.variables)}
    return True, witness, nodes


def _dense_witness(variables, values) -> dict:
    """Consecutive integer ranks of the store values, order preserved.

    Variables the store never saw get fresh classes above everything:
    no equality is introduced that the store did not force.
    """
    full = {}
    nxt = max(values.values(), default=0) + 1
    for v in variables:
        if v in values:
            full[v] = values[v]
        else:
            full[v] = nxt
            nxt += 1
    rank = {val: i for i, val in enumerate(sorted(set(full.values())))}
    return {v: rank[full[v]] for v in variables}


def _model_atoms(scope, groups, model) -> list:
    atoms = []
    for w, g in zip(model, groups):
        for a in range(len(g)):
            for b in range(a + 1, len(g)):
                u, v = scope[g[a]], scope[g[b]]
                if w.ranks[a] == w.ranks[b]:
                    atoms.append(OrderAtom(u, "=", v))
                elif w.ranks[a] < w.ranks[b]:
                    atoms.append(OrderAtom(u, "<", v))
                else:
                    atoms.append(OrderAtom(v, "<", u))
    return atoms


def _point_backtracking(pinst: PointInstance):
    """Depth-first choice of one model per grouped constraint.

    Constraints are ordered by ascending model count, then scope;
    models ascend by rank pattern.  Every candidate extension is checked
    for conjunctive consistency before descending.
    """
    cons = sorted(pinst.grouped,
                  key=lambda c: (len(c[1].models), c[0]))
    ordered_models = [
        (scope, rel.groups,
         sorted(rel.models, key=lambda m: tuple(w.ranks for w in m)))
        for scope, rel in cons]
    nodes = 0
    base = list(pinst.atoms)

    def rec(i, atoms):
        nonlocal nodes
        if i == len(ordered_models):
            return atoms
        scope, groups, models = ordered_models[i]
        for model in models:
            candidate = atoms + _model_atoms(scope, groups, model)
            nodes += 1
            if conjunction_satisfiable(candidate):
                got = rec(i + 1, candidate)
                if got is not None:
                    return got
        return None

    nodes += 1
    final = rec(0, base) if conjunction_satisfiable(base) else None
    if final is None:
        return False, None, nodes
    store = ConjunctiveStore()
    store.add_all(final)
    return True, _dense_witness(pinst.variables, store.witness()), nodes


def _rename_clause(clause, sub: dict):
    if isinstance(clause, ORDClause):
        head = clause.head
        if head is not None:
            head = (sub[head[0]], head[1], sub[head[2]])
        return ORDClause(tuple((sub[a], sub[b])
                               for a, b in clause.neq_literals), head)
    return LLClause(tuple((sub[a], sub[b]) for a, b in clause.antecedent),
                    sub[clause.head_var] if clause.head_var else None,
                    tuple(sub[z] for z in clause.strict_tail),
                    clause.all_equal)


def point_clauses(pinst: PointInstance) -> ClauseSet:
    """ORD-Horn clause set equivalent to the instance, or SolveError when
    some grouped constraint is not ORD-Horn definable."""
    _check_no_constants(pinst)
    clauses = []
    for a in pinst.atoms:
        if a.op == "!=":
            clauses.append(ORDClause(((a.lhs, a.rhs),), None))
        elif a.op in ("<", "<=", "="):
            clauses.append(ORDClause((), (a.lhs, a.op, a.rhs)))
        else:
            raise SolveError(f"unsupported atom operator {a.op!r}")
    for scope, rel in pinst.grouped:
        names = tuple(f"t{i}" for i in range(len(scope)))
        try:
            cs = ordhorn_definable(rel, names=names)
        except ClauseError as e:
            raise SolveError(str(e)) from e
        if cs is None:
            raise SolveError(
                f"constraint over {scope} is not ORD-Horn definable")
        sub = dict(zip(names, scope))
        clauses.extend(_rename_clause(c, sub) for c in cs.clauses)
    return ClauseSet(tuple(pinst.variables), tuple(clauses))


def _point_ordhorn(pinst: PointInstance):
    if any(not rel.models for _, rel in pinst.grouped):
        return False, None, 0
    cs = point_clauses(pinst)
    res = propagate_ord(cs)
    if not res.satisfiable:
        return False, None, res.firings
    values = res.store.witness() if res.store is not None else {}
    return True, _dense_witness(pinst.variables, values), res.firings


def _solve_point(pinst: PointInstance, strategy: str, max_slots: int):
    _check_no_constants(pinst)
    if strategy == "auto":
        if any(len(scope) > ORD_AUTO_CAP for scope, _ in pinst.grouped):
            sat, witness, nodes = _point_backtracking(pinst)
            return sat, witness, nodes, 0, "backtracking"
        try:
            sat, witness, firings = _point_ordhorn(pinst)
            return sat, witness, 0, firings, "ordhorn"
        except SolveError:
            sat, witness, nodes = _point_backtracking(pinst)
            return sat, witness, nodes, 0, "backtracking"
    if strategy == "ordhorn":
        sat, witness, firings = _point_ordhorn(pinst)
        return sat, witness, 0, firings, "ordhorn"
    if strategy == "backtracking":
        sat, witness, nodes = _point_backtracking(pinst)
        return sat, witness, nodes, 0, "backtracking"
    if strategy == "bruteforce":
        sat, witness, nodes = _point_bruteforce(pinst, max_slots)
        return sat, witness, nodes, 0, "bruteforce"
    raise SolveError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# entry point


def solve(inst: Union[QualInstance, PointInstance], strategy: str = "auto",
          *, max_slots: int = BRUTEFORCE_SLOT_CAP,
          seed: Optional[int] = None) -> SolveReport:
    """Decide an instance; the report's strategy field names the one used.

    auto solves by propagation when every constraint is ORD-Horn definable
    and falls back to backtracking otherwise.  translate:<catalog-name>
    rewrites a qualitative instance through the named interpretation and
    solves the image; its witness lives in the image's variables.
    """
    t0 = time.perf_counter()
    if strategy.startswith("translate:"):
        if not isinstance(inst, QualInstance):
            raise SolveError("translate needs a qualitative instance")
        name = strategy.split(":", 1)[1]
        entry = catalog().get(name)
        if entry is None or not hasattr(entry, "relation_formulas"):
            raise SolveError(f"no interpretation named {name!r} in the catalog")
        try:
            pinst = translate_instance(inst, entry)
        except CalculusError as e:
            raise SolveError(str(e)) from e
        sat, witness, nodes, firings, _ = _solve_point(pinst, "auto", max_slots)
        if sat and witness is not None and not pinst.satisfied_by(witness):
            raise SolveError("internal error: witness fails the translated instance")
        ms = (time.perf_counter() - t0) * 1000.0
        return SolveReport(sat, witness, strategy, nodes, firings, ms, seed)
    if isinstance(inst, QualInstance):
        pinst = point_encoding(inst)
        sat, values, nodes, firings, used = _solve_point(pinst, strategy, max_slots)
        witness = None
        if sat and values is not None:
            witness = {}
            for v in inst.variables:
                slots = inst.calculus.slots_for(v)
                witness[v] = inst.calculus.make_element(
                    tuple(values[s] for s in slots))
            if not inst.satisfied_by(witness):
                raise SolveError("internal error: witness fails the instance")
        ms = (time.perf_counter() - t0) * 1000.0
        return SolveReport(sat, witness, used, nodes, firings, ms, seed)
    sat, witness, nodes, firings, used = _solve_point(inst, strategy, max_slots)
    if sat and witness is not None and not inst.satisfied_by(witness):
        raise SolveError("internal error: witness fails the instance")
    ms = (time.perf_counter() - t0) * 1000.0
    return SolveReport(sat, witness, used, nodes, firings, ms, seed)


# ---------------------------------------------------------------------------
# random elements, shared by the homotopy command and property tests


def homotopy_samples(witness, n: int, rng, max_draws: Optional[int] = None):
    """n rejection-sampled tuples inside the composed map's domain."""
    structure = witness.composed.source
    dim = witness.composed.dimension
    if max_draws is None:
        max_draws = 2000 * n
    found = 0
    for _ in range(max_draws):
        sample = tuple(random_element(structure, rng) for _ in range(dim))
        if witness.composed.in_domain(sample):
            found += 1
            yield sample
            if found == n:
                return
    raise SolveError(
        f"only {found} of {n} requested samples hit the domain "
        f"within {max_draws} draws")


def random_element(structure: str, rng):
    """A small random element of the named structure (POINT: an integer)."""
    if structure == POINT_ALGEBRA:
        return rng.randint(-9, 9)
    calc = calculus_by_name(structure)
    if calc.name == "CDC":
        return calc.make_element((rng.randint(-9, 9), rng.randint(-9, 9)))
    if calc.name == "DIA":
        s = rng.randint(-9, 9)
        d = rng.randint(1, 6)
        return calc.make_element((s, s + d) if rng.random() < 0.5 else (s, s - d))
    # interval-like axes: IA and the block algebras
    p = len(calc.slot_suffixes) // 2
    values = []
    for _ in range(p):
        lo = rng.randint(-9, 7)
        values.extend((lo, rng.randint(lo + 1, 9)))
    return calc.make_element(tuple(values))
