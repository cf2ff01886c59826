r"""Clause classes over rational orders: ll-Horn and ORD-Horn.

An ll clause is (x1=y1 & ... & xk=yk) => (z1<z0 \/ ... \/ zl<z0), optionally
with the extra disjunct z0=z1=...=zl; every strict atom shares the head
variable z0.  ORD clauses carry disequality literals plus at most one head
literal among u<v, u<=v, u=v.  The dual reading replaces every < by >.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .points import (
    RANK_MATRIX_CAP,
    WEAK_ORDER_CAP,
    ConjunctiveStore,
    PointRelation,
    WeakOrder,
    iter_weak_orders,
    rank_matrix,
)


class ClauseError(ValueError):
    pass


def _norm_pairs(pairs) -> tuple:
    return tuple(sorted({tuple(sorted(p)) for p in pairs}))


@dataclass(frozen=True)
class LLClause:
    """Equality antecedents implying strict lower bounds on one head var."""

    antecedent: tuple = ()
    head_var: Optional[str] = None
    strict_tail: tuple = ()
    all_equal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "antecedent", _norm_pairs(self.antecedent))
        object.__setattr__(self, "strict_tail",
                           tuple(sorted(set(self.strict_tail))))
        if self.head_var in self.strict_tail:
            raise ClauseError(f"head {self.head_var!r} cannot be in its own tail")
        if self.all_equal and not self.strict_tail:
            raise ClauseError("the all-equal disjunct needs tail variables")
        has_sequent = bool(self.strict_tail) or self.all_equal
        if has_sequent != (self.head_var is not None):
            raise ClauseError("head variable present iff the sequent is nonempty")

    def variables(self) -> tuple:
        seen = []
        for u, v in self.antecedent:
            seen.extend((u, v))
        if self.head_var is not None:
            seen.append(self.head_var)
        seen.extend(self.strict_tail)
        return tuple(dict.fromkeys(seen))

    def satisfied_by(self, ranks, dual: bool = False) -> bool:
        if any(ranks[u] != ranks[v] for u, v in self.antecedent):
            return True
        z0 = self.head_var
        if z0 is None:
            return False
        for z in self.strict_tail:
            if (ranks[z] > ranks[z0]) if dual else (ranks[z] < ranks[z0]):
                return True
        return self.all_equal and all(
            ranks[z] == ranks[z0] for z in self.strict_tail)


@dataclass(frozen=True)
class ORDClause:
    """Disequality literals plus at most one order/equality head literal."""

    neq_literals: tuple = ()
    head: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "neq_literals", _norm_pairs(self.neq_literals))
        if self.head is not None:
            u, op, v = self.head
            if op not in ("<", "<=", "="):
                raise ClauseError(f"bad head operator {op!r}")
            if op == "=":
                u, v = sorted((u, v))
            object.__setattr__(self, "head", (u, op, v))

    def variables(self) -> tuple:
        seen = []
        for u, v in self.neq_literals:
            seen.extend((u, v))
        if self.head is not None:
            seen.extend((self.head[0], self.head[2]))
        return tuple(dict.fromkeys(seen))

    def satisfied_by(self, ranks, dual: bool = False) -> bool:
        if any(ranks[u] != ranks[v] for u, v in self.neq_literals):
            return True
        if self.head is None:
            return False
        u, op, v = self.head
        if op == "=":
            return ranks[u] == ranks[v]
        if dual:
            return ranks[u] > ranks[v] if op == "<" else ranks[u] >= ranks[v]
        return ranks[u] < ranks[v] if op == "<" else ranks[u] <= ranks[v]


@dataclass(frozen=True)
class ClauseSet:
    variables: tuple
    clauses: tuple = ()
    dual: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if len(set(self.variables)) != len(self.variables):
            raise ClauseError("duplicate variable declaration")
        declared = set(self.variables)
        for c in self.clauses:
            if not isinstance(c, (LLClause, ORDClause)):
                raise ClauseError(f"not a clause: {c!r}")
            undeclared = set(c.variables()) - declared
            if undeclared:
                raise ClauseError(f"undeclared variables {sorted(undeclared)}")

    def satisfied_by(self, ranks) -> bool:
        return all(c.satisfied_by(ranks, self.dual) for c in self.clauses)


# ---------------------------------------------------------------------------
# class membership


def is_ll_horn(cs: ClauseSet) -> bool:
    """Every clause fits the ll shape: strict atoms share one head variable.

    ORD clauses qualify through their reading as ll clauses: a headless
    clause is the l=0 form, u<v is a one-atom tail, u<=v is the tail plus
    the all-equal disjunct.  A bare equality head has no ll rendering.
    """
    for c in cs.clauses:
        if isinstance(c, LLClause):
            continue
        if c.head is not None and c.head[1] == "=":
            return False
    return True


def is_ord_horn(cs: ClauseSet) -> bool:
    r"""At most one non-disequality literal per clause, counting z1<z0 \/
    z0=z1 as the single literal z1<=z0."""
    for c in cs.clauses:
        if isinstance(c, ORDClause):
            continue
        if len(c.strict_tail) > 1:
            return False
    return True


def _as_ord(clause) -> ORDClause:
    if isinstance(clause, ORDClause):
        return clause
    if len(clause.strict_tail) > 1:
        raise ClauseError(f"non-ORD-Horn clause present: {render_clause(clause)}")
    neqs = clause.antecedent
    if not clause.strict_tail:
        return ORDClause(neqs, None)
    (z,) = clause.strict_tail
    op = "<=" if clause.all_equal else "<"
    return ORDClause(neqs, (z, op, clause.head_var))


# ---------------------------------------------------------------------------
# semantics


def _clause_mask(clause, M, index, dual: bool) -> np.ndarray:
    n = len(M)
    if isinstance(clause, ORDClause):
        mask = np.zeros(n, dtype=bool)
        for u, v in clause.neq_literals:
            mask |= M[:, index[u]] != M[:, index[v]]
        if clause.head is not None:
            u, op, v = clause.head
            a, b = M[:, index[u]], M[:, index[v]]
            if op == "=":
                mask |= a == b
            elif op == "<":
                mask |= (a > b) if dual else (a < b)
            else:
                mask |= (a >= b) if dual else (a <= b)
        return mask
    ante = np.ones(n, dtype=bool)
    for u, v in clause.antecedent:
        ante &= M[:, index[u]] == M[:, index[v]]
    mask = ~ante
    if clause.head_var is None:
        return mask
    z0 = M[:, index[clause.head_var]]
    for z in clause.strict_tail:
        zc = M[:, index[z]]
        mask |= (zc > z0) if dual else (zc < z0)
    if clause.all_equal:
        chain = np.ones(n, dtype=bool)
        for z in clause.strict_tail:
            chain &= M[:, index[z]] == z0
        mask |= chain
    return mask


def _set_mask(clauses, M, index, dual: bool) -> np.ndarray:
    mask = np.ones(len(M), dtype=bool)
    for c in clauses:
        mask &= _clause_mask(c, M, index, dual)
    return mask


def models_of(cs: ClauseSet, k: int) -> PointRelation:
    """The weak orders on the declared variables satisfying every clause."""
    if k != len(cs.variables):
        raise ClauseError(f"arity {k} != {len(cs.variables)} declared variables")
    if k > WEAK_ORDER_CAP:
        raise ClauseError(f"arity {k} exceeds the enumeration cap {WEAK_ORDER_CAP}")
    if k <= RANK_MATRIX_CAP:
        M = rank_matrix(k)
        index = {v: i for i, v in enumerate(cs.variables)}
        mask = _set_mask(cs.clauses, M, index, cs.dual)
        orders = (WeakOrder(tuple(int(r) for r in M[i]))
                  for i in np.flatnonzero(mask))
        return PointRelation.single(k, orders)
    orders = []
    for w in iter_weak_orders(k):
        ranks = dict(zip(cs.variables, w.ranks))
        if cs.satisfied_by(ranks):
            orders.append(w)
    return PointRelation.single(k, orders)


def relation_mask(R: PointRelation) -> np.ndarray:
    """Boolean membership of R over the rank_matrix rows of its arity.

    Rows and per-group models are matched through a base-3 encoding of the
    pairwise comparison pattern, so grouped relations cost one pass.
    """
    M = rank_matrix(R.arity).astype(np.int64)
    n = len(M)
    joint = np.zeros(n, dtype=np.int64)
    sizes = []
    for g in R.groups:
        code = np.zeros(n, dtype=np.int64)
        for a, b in itertools.combinations(range(len(g)), 2):
            code = code * 3 + (np.sign(M[:, g[a]] - M[:, g[b]]) + 1)
        npairs = len(g) * (len(g) - 1) // 2
        joint = joint * (3 ** npairs) + code
        sizes.append(npairs)

    def model_code(model) -> int:
        total = 0
        for gi, g in enumerate(R.groups):
            w = model[gi]
            code = 0
            for a, b in itertools.combinations(range(len(g)), 2):
                d = (w.ranks[a] > w.ranks[b]) - (w.ranks[a] < w.ranks[b])
                code = code * 3 + d + 1
            total = total * (3 ** sizes[gi]) + code
        return total

    wanted = np.fromiter((model_code(m) for m in R.models), dtype=np.int64,
                         count=len(R.models))
    return np.isin(joint, wanted)


# ---------------------------------------------------------------------------
# definability by maximal-clause separation


def _ord_candidates(ranks, names):
    # weakest clause false at this order: all refutable disequalities plus
    # one head literal that the order falsifies
    neqs = tuple((names[i], names[j])
                 for i, j in itertools.combinations(range(len(names)), 2)
                 if ranks[i] == ranks[j])
    yield ORDClause(neqs, None)
    for i, j in itertools.permutations(range(len(names)), 2):
        if ranks[i] >= ranks[j]:
            yield ORDClause(neqs, (names[i], "<", names[j]))
    for i, j in itertools.permutations(range(len(names)), 2):
        if ranks[i] > ranks[j]:
            yield ORDClause(neqs, (names[i], "<=", names[j]))
    for i, j in itertools.combinations(range(len(names)), 2):
        if ranks[i] != ranks[j]:
            yield ORDClause(neqs, (names[i], "=", names[j]))


def _ll_candidates(ranks, names):
    # the all-equal disjunct ties the tail: a smaller tail weakens the
    # chain even as it drops strict atoms, so tail subsets are enumerated
    rank = dict(zip(names, ranks))
    ante = tuple((names[i], names[j])
                 for i, j in itertools.combinations(range(len(names)), 2)
                 if ranks[i] == ranks[j])
    yield LLClause(ante, None, (), False)
    for z0 in names:
        maxtail = tuple(z for z in names if z != z0 and rank[z] >= rank[z0])
        if maxtail:
            yield LLClause(ante, z0, maxtail, False)
        for size in range(1, len(maxtail) + 1):
            for T in itertools.combinations(maxtail, size):
                if any(rank[z] != rank[z0] for z in T):
                    yield LLClause(ante, z0, T, True)


def _strengthen_variants(clause):
    # dropping a literal strengthens the clause yet keeps it false wherever
    # it was false; used to turn an accepted maximal clause into a lean one
    if isinstance(clause, ORDClause):
        for i in range(len(clause.neq_literals)):
            yield ORDClause(clause.neq_literals[:i] + clause.neq_literals[i + 1:],
                            clause.head)
        return
    for i in range(len(clause.antecedent)):
        yield LLClause(clause.antecedent[:i] + clause.antecedent[i + 1:],
                       clause.head_var, clause.strict_tail, clause.all_equal)
    yield from _shrunk_variants(clause)


def _definable(R: PointRelation, names, candidates, dual: bool):
    k = R.arity
    if k > RANK_MATRIX_CAP:
        raise ClauseError(f"arity {k} exceeds the separation cap {RANK_MATRIX_CAP}")
    if names is None:
        names = tuple(f"x{i}" for i in range(k))
    names = tuple(names)
    if len(names) != k:
        raise ClauseError(f"{len(names)} names for arity {k}")
    M = rank_matrix(k)
    index = {v: i for i, v in enumerate(names)}
    target = relation_mask(R)
    if not target.any():
        raise ClauseError("empty relations have no clause definition")
    model_rows = M[target]
    # spaced sample of model rows rejects bad candidates before a full pass
    probe = model_rows[:: max(1, len(model_rows) // 256)]
    covered = target.copy()
    chosen = []
    while not covered.all():
        w = int(np.argmin(covered))
        ranks = tuple(int(r) for r in M[w])
        found = None
        for clause in candidates((-r for r in ranks) if dual else ranks, names):
            if not _clause_mask(clause, probe, index, dual).all():
                continue
            if not _clause_mask(clause, model_rows, index, dual).all():
                continue
            found = clause
            break
        if found is None:
            return None
        improving = True
        while improving:
            improving = False
            for variant in _strengthen_variants(found):
                if _clause_mask(variant, model_rows, index, dual).all():
                    found = variant
                    improving = True
                    break
        covered |= ~_clause_mask(found, M, index, dual)
        if found not in chosen:
            chosen.append(found)
    return ClauseSet(names, tuple(chosen), dual)


def ordhorn_definable(R: PointRelation, names=None,
                      dual: bool = False) -> Optional[ClauseSet]:
    """An ORD clause set with exactly R's models, or None.

    Every weak order outside R must be excluded by some clause true on all
    of R; it suffices to test, per excluded order, the literal-maximal
    clauses false there.
    """
    def gen(ranks, names):
        return _ord_candidates(tuple(ranks), names)
    return _definable(R, names, gen, dual)


def llhorn_definable(R: PointRelation, names=None,
                     dual: bool = False) -> Optional[ClauseSet]:
    """An ll clause set with exactly R's models, or None (dual: > for <)."""
    def gen(ranks, names):
        return _ll_candidates(tuple(ranks), names)
    return _definable(R, names, gen, dual)


# ---------------------------------------------------------------------------
# minimal specifications


def _shrunk_variants(clause):
    if isinstance(clause, ORDClause):
        if clause.head is not None:
            yield ORDClause(clause.neq_literals, None)
        return
    if clause.all_equal:
        yield LLClause(clause.antecedent, clause.head_var,
                       clause.strict_tail, False)
    for z in clause.strict_tail:
        rest = tuple(t for t in clause.strict_tail if t != z)
        if rest:
            yield LLClause(clause.antecedent, clause.head_var, rest,
                           clause.all_equal)
        else:
            yield LLClause(clause.antecedent, None, (), False)


def minimize(cs: ClauseSet, R: PointRelation) -> ClauseSet:
    """Drop needless clauses, then shrink each sequent, preserving models."""
    k = R.arity
    if k != len(cs.variables):
        raise ClauseError(f"relation arity {k} != {len(cs.variables)} variables")
    M = rank_matrix(k)
    index = {v: i for i, v in enumerate(cs.variables)}
    target = relation_mask(R)
    clauses = list(cs.clauses)
    masks: dict = {}

    def preserved(trial) -> bool:
        got = np.ones(len(M), dtype=bool)
        for c in trial:
            if c not in masks:
                masks[c] = _clause_mask(c, M, index, cs.dual)
            got &= masks[c]
        return np.array_equal(got, target)

    if not preserved(clauses):
        raise ClauseError("clause set does not define the relation")

    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(clauses):
            trial = clauses[:i] + clauses[i + 1:]
            if preserved(trial):
                clauses = trial
                changed = True
            else:
                i += 1
        for i, c in enumerate(clauses):
            shrunk = True
            while shrunk:
                shrunk = False
                for variant in _shrunk_variants(clauses[i]):
                    trial = clauses[:i] + [variant] + clauses[i + 1:]
                    if preserved(trial):
                        clauses = trial
                        changed = shrunk = True
                        break
    return ClauseSet(cs.variables, tuple(clauses), cs.dual)


# ---------------------------------------------------------------------------
# ORD-Horn satisfiability by monotone propagation


@dataclass(frozen=True)
class OrdPropagation:
    satisfiable: bool
    firings: int
    backtracks: int = 0
    # the fixpoint store; any linearization of it models the clause set
    store: object = field(default=None, repr=False, compare=False)


def propagate_ord(cs: ClauseSet) -> OrdPropagation:
    """Decide an all-ORD clause set by firing refuted clauses into a store.

    A clause fires once the store's equality closure refutes every one of
    its disequality literals; its head is then asserted (a fired headless
    clause is a contradiction).  The store is inconsistent exactly when a
    strict cycle arises modulo forced equalities.

    Completeness at the fixpoint: linearize the store's equality classes
    consistently with its order atoms; every equality the store does not
    force becomes false, so each unfired clause keeps a true disequality
    literal.  No search happens, hence backtracks = 0 always.
    """
    clauses = [_as_ord(c) for c in cs.clauses]
    store = ConjunctiveStore()
    fired = [False] * len(clauses)
    firings = 0
    changed = True
    while changed:
        changed = False
        if store.inconsistent():
            return OrdPropagation(False, firings, store=store)
        for i, c in enumerate(clauses):
            if fired[i]:
                continue
            if all(store.forced_equal(u, v) for u, v in c.neq_literals):
                fired[i] = True
                firings += 1
                if c.head is None:
                    return OrdPropagation(False, firings, store=store)
                u, op, v = c.head
                if cs.dual and op in ("<", "<="):
                    u, v = v, u
                store.add(u, op, v)
                changed = True
    return OrdPropagation(not store.inconsistent(), firings, store=store)


def ordhorn_satisfiable(cs: ClauseSet) -> bool:
    return propagate_ord(cs).satisfiable


# ---------------------------------------------------------------------------
# clause text: one clause per line, # comments
#   x != y \/ u = v
#   x = y /\ u = v -> z1 < z0 \/ z2 < z0 [alleq]


_OPS = ("!=", "<=", "<", "=")


def _parse_atom(text: str, lineno: int, want=None):
    for op in _OPS:
        if op in text:
            lhs, rhs = text.split(op, 1)
            lhs, rhs = lhs.strip(), rhs.strip()
            if not lhs or not rhs or any(
                    ch in lhs + rhs for ch in "<>=!\\/ \t"):
                break
            if want and op not in want:
                raise ClauseError(
                    f"line {lineno}: operator {op!r} not allowed in {text.strip()!r}")
            return lhs, op, rhs
    raise ClauseError(f"line {lineno}: cannot parse atom {text.strip()!r}")


def parse_clause(line: str, lineno: int = 1):
    line = line.strip()
    all_equal = False
    if line.endswith("[alleq]"):
        all_equal = True
        line = line[: -len("[alleq]")].strip()
    if "->" in line:
        ante_txt, seq_txt = line.split("->", 1)
        ante = []
        if ante_txt.strip():
            for part in ante_txt.split("/\\"):
                u, _, v = _parse_atom(part, lineno, want=("=",))
                ante.append((u, v))
        seq_txt = seq_txt.strip()
        if not seq_txt:
            if all_equal:
                raise ClauseError(f"line {lineno}: [alleq] needs tail atoms")
            return LLClause(tuple(ante), None, (), False)
        head_var = None
        tail = []
        for part in seq_txt.split("\\/"):
            u, _, v = _parse_atom(part, lineno, want=("<",))
            if head_var is None:
                head_var = v
            elif head_var != v:
                raise ClauseError(
                    f"line {lineno}: strict atoms must share the head "
                    f"variable ({head_var!r} vs {v!r})")
            tail.append(u)
        return LLClause(tuple(ante), head_var, tuple(tail), all_equal)
    if all_equal:
        raise ClauseError(f"line {lineno}: [alleq] only applies after ->")
    neqs = []
    head = None
    for part in line.split("\\/"):
        u, op, v = _parse_atom(part, lineno)
        if op == "!=":
            neqs.append((u, v))
        elif head is not None:
            raise ClauseError(f"line {lineno}: more than one sequent atom")
        else:
            head = (u, op, v)
    return ORDClause(tuple(neqs), head)


def parse_clauses(text: str) -> ClauseSet:
    clauses = []
    variables: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        clause = parse_clause(line, lineno)
        clauses.append(clause)
        for v in clause.variables():
            variables[v] = None
    return ClauseSet(tuple(variables), tuple(clauses))


def render_clause(clause) -> str:
    if isinstance(clause, ORDClause):
        lits = [f"{u} != {v}" for u, v in clause.neq_literals]
        if clause.head is not None:
            u, op, v = clause.head
            lits.append(f"{u} {op} {v}")
        return " \\/ ".join(lits)
    ante = " /\\ ".join(f"{u} = {v}" for u, v in clause.antecedent)
    tail = " \\/ ".join(f"{z} < {clause.head_var}" for z in clause.strict_tail)
    out = f"{ante} -> {tail}".strip()
    if clause.all_equal:
        out += " [alleq]"
    return out


def render_clauses(cs: ClauseSet) -> str:
    return "\n".join(render_clause(c) for c in cs.clauses)
