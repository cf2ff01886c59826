"""The point language over (Q; <).

First-order-definable relations over the rationals are unions of weak
orders (rankings with ties) of the argument slots, so relations are kept
as explicit sets of canonical weak orders.  Slots split into comparability
groups: slots of different groups are never compared (block algebra axes,
cardinal-direction coordinates), and a model is one weak order per group.

Satisfiability of conjunctions of order atoms is decided exactly by a
small graph store: union-find for equalities, a digraph of strict and
non-strict edges over the classes, a constant spine, and a strongly
connected component check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .relations import (
    Calculus,
    OrderAtom,
    QualitativeRelation,
    Rational,
    _eval_conjunction,
    _q,
)

WEAK_ORDER_CAP = 10  # enumeration beyond this is refused loudly
RANK_MATRIX_CAP = 8
_ENUM_CACHE_MAX = 7  # ordered Bell numbers explode; cache only small arities


@dataclass(frozen=True, slots=True)
class WeakOrder:
    """Canonical ranking with ties: ranks use exactly 0..m-1."""

    ranks: tuple[int, ...]

    def __post_init__(self):
        if not self.ranks:
            raise ValueError("weak order needs at least one slot")
        m = max(self.ranks)
        if set(self.ranks) != set(range(m + 1)):
            raise ValueError(f"ranks not canonical: {self.ranks!r}")

    @property
    def arity(self) -> int:
        return len(self.ranks)

    @property
    def num_classes(self) -> int:
        return max(self.ranks) + 1

    def __repr__(self):
        return "w" + repr(self.ranks)


def weak_order_of(values: Sequence) -> WeakOrder:
    """Canonical weak order induced by a tuple of rationals."""
    vals = [_q(v) for v in values]
    rank = {v: i for i, v in enumerate(sorted(set(vals)))}
    return WeakOrder(tuple(rank[v] for v in vals))


def _iter_rank_tuples(k: int) -> Iterator[tuple[int, ...]]:
    # insertion recurrence: each order on k-1 slots with m classes yields
    # m "join a class" children and m+1 "new class at cut j" children
    if k <= _ENUM_CACHE_MAX:
        yield from _cached_rank_tuples(k)
        return
    for t in _iter_rank_tuples(k - 1):
        m = max(t) + 1
        for j in range(m):
            yield t + (j,)
        for j in range(m + 1):
            yield tuple(r + 1 if r >= j else r for r in t) + (j,)


@lru_cache(maxsize=None)
def _cached_rank_tuples(k: int) -> tuple[tuple[int, ...], ...]:
    if k == 1:
        return ((0,),)
    out = []
    for t in _cached_rank_tuples(k - 1):
        m = max(t) + 1
        for j in range(m):
            out.append(t + (j,))
        for j in range(m + 1):
            out.append(tuple(r + 1 if r >= j else r for r in t) + (j,))
    return tuple(out)


def iter_weak_orders(k: int) -> Iterator[WeakOrder]:
    if not 1 <= k <= WEAK_ORDER_CAP:
        raise ValueError(
            f"weak-order enumeration supports 1..{WEAK_ORDER_CAP} slots, got {k}")
    return (WeakOrder(t) for t in _iter_rank_tuples(k))


@lru_cache(maxsize=_ENUM_CACHE_MAX)
def _cached_weak_orders(k: int) -> tuple[WeakOrder, ...]:
    return tuple(WeakOrder(t) for t in _cached_rank_tuples(k))


def enumerate_weak_orders(k: int) -> tuple[WeakOrder, ...]:
    """All canonical weak orders on k slots, each exactly once.

    Cached for k <= 7; larger arities (up to the cap) are materialized on
    every call, which is slow and large.  Bulk consumers should prefer
    rank_matrix.
    """
    if not 1 <= k <= WEAK_ORDER_CAP:
        raise ValueError(
            f"weak-order enumeration supports 1..{WEAK_ORDER_CAP} slots, got {k}")
    if k <= _ENUM_CACHE_MAX:
        return _cached_weak_orders(k)
    return tuple(iter_weak_orders(k))


_RANK_MATRICES: dict[int, np.ndarray] = {}


def _ragged_aranges(counts: np.ndarray) -> np.ndarray:
    # concatenation of arange(c) for each c in counts
    ends = counts.cumsum()
    starts = ends - counts
    return np.arange(int(ends[-1])) - np.repeat(starts, counts)


def rank_matrix(k: int) -> np.ndarray:
    """All weak orders on k slots as one int8 row each (own row order)."""
    if not 1 <= k <= RANK_MATRIX_CAP:
        raise ValueError(
            f"rank_matrix supports 1..{RANK_MATRIX_CAP} slots, got {k}")
    if k not in _RANK_MATRICES:
        if k == 1:
            m = np.zeros((1, 1), dtype=np.int8)
        else:
            prev = rank_matrix(k - 1).astype(np.int64)
            classes = prev.max(axis=1) + 1
            joins = np.repeat(prev, classes, axis=0)
            join_col = _ragged_aranges(classes)
            ins = np.repeat(prev, classes + 1, axis=0)
            ins_col = _ragged_aranges(classes + 1)
            ins = ins + (ins >= ins_col[:, None])
            m = np.concatenate(
                [np.column_stack([joins, join_col]),
                 np.column_stack([ins, ins_col])],
                axis=0,
            ).astype(np.int8)
        _RANK_MATRICES[k] = m
    return _RANK_MATRICES[k]


# ---------------------------------------------------------------------------
# conjunctive order constraints


class ConjunctiveStore:
    """Exact satisfiability for conjunctions of atoms over (Q; <).

    Nodes are variable names (str) and rational constants.  Equalities
    merge union-find classes, < and <= are digraph edges over classes,
    and distinct constants are chained into a strict spine so numeric
    inconsistencies surface as strict cycles.  The conjunction is
    unsatisfiable iff a strongly connected component contains a strict
    edge (or two distinct constants were equated); a disequality fails
    iff its sides land in the same component.
    """

    def __init__(self):
        self._parent: dict = {}
        self._lt: list[tuple] = []
        self._le: list[tuple] = []
        self._neq: list[tuple] = []
        self._bad = False
        self._analysis_cache = None

    # -- construction -------------------------------------------------------

    def _node(self, term):
        node = term if isinstance(term, str) else _q(term)
        if node not in self._parent:
            self._parent[node] = node
            self._analysis_cache = None
        return node

    def _find(self, node):
        parent = self._parent
        root = node
        while parent[root] != root:
            root = parent[root]
        while parent[node] != root:
            parent[node], node = root, parent[node]
        return root

    def add(self, lhs, op: str, rhs) -> None:
        a, b = self._node(lhs), self._node(rhs)
        self._analysis_cache = None
        if op == "=":
            ra, rb = self._find(a), self._find(b)
            if ra == rb:
                return
            if isinstance(ra, Fraction) and isinstance(rb, Fraction):
                self._bad = True  # two distinct constants equated
                return
            # constants stay roots so each class keeps its pinned value
            if isinstance(ra, Fraction):
                self._parent[rb] = ra
            else:
                self._parent[ra] = rb
        elif op == "<":
            self._lt.append((a, b))
        elif op == "<=":
            self._le.append((a, b))
        elif op == "!=":
            self._neq.append((a, b))
        else:
            raise ValueError(f"unknown atom op {op!r}")

    def add_atom(self, atom: OrderAtom) -> None:
        self.add(atom.lhs, atom.op, atom.rhs)

    def add_all(self, atoms: Iterable[OrderAtom]) -> None:
        for atom in atoms:
            self.add_atom(atom)

    # -- analysis -----------------------------------------------------------

    def _analysis(self):
        """Classes, SCC ids, and the strict/weak class edges."""
        if self._analysis_cache is not None:
            return self._analysis_cache
        consts = sorted(n for n in self._parent if isinstance(n, Fraction))
        spine = list(zip(consts, consts[1:]))
        cls = {n: self._find(n) for n in self._parent}
        strict = {(cls[u], cls[v]) for u, v in self._lt}
        strict |= {(cls[u], cls[v]) for u, v in spine}
        weak = {(cls[u], cls[v]) for u, v in self._le}
        nodes = sorted(set(cls.values()), key=repr)
        adj = {n: [] for n in nodes}
        for u, v in strict | weak:
            adj[u].append(v)
        comp = _tarjan_scc(nodes, adj)
        self._analysis_cache = (cls, comp, strict, weak)
        return self._analysis_cache

    def inconsistent(self) -> bool:
        if self._bad:
            return True
        cls, comp, strict, _ = self._analysis()
        return any(comp[u] == comp[v] for u, v in strict)

    def forced_equal(self, lhs, rhs) -> bool:
        """Whether every solution of the (consistent) store equates the sides."""
        a = lhs if isinstance(lhs, str) else _q(lhs)
        b = rhs if isinstance(rhs, str) else _q(rhs)
        if a == b:
            return True
        if a not in self._parent or b not in self._parent:
            return False
        cls, comp, _, _ = self._analysis()
        return comp[cls[a]] == comp[cls[b]]

    def satisfiable(self) -> bool:
        if self.inconsistent():
            return False
        return not any(self.forced_equal(u, v) for u, v in self._neq)

    def witness(self) -> Optional[dict]:
        """A rational assignment satisfying every added atom, or None.

        Components get pairwise distinct values (safe: non-strict edges
        across components may always be realized strictly), so all
        disequalities not refuted by forced equality come out true.
        """
        if not self.satisfiable():
            return None
        cls, comp, strict, weak = self._analysis()
        comp_ids = []
        seen = set()
        for n in cls.values():  # Tarjan ids: comp[v] <= comp[u] for edges u->v
            if comp[n] not in seen:
                seen.add(comp[n])
                comp_ids.append(comp[n])
        order = sorted(comp_ids)  # reverse topological
        succs = {c: set() for c in comp_ids}
        preds = {c: set() for c in comp_ids}
        for u, v in strict | weak:
            if comp[u] != comp[v]:
                succs[comp[u]].add(comp[v])
                preds[comp[v]].add(comp[u])
        pinned = {}
        for n in self._parent:
            if isinstance(n, Fraction):
                pinned[comp[cls[n]]] = n
        upper: dict = {}
        for c in order:  # reverse topo: successors first
            bounds = [pinned[s] if s in pinned else upper[s] for s in succs[c]]
            bounds = [b for b in bounds if b is not None]
            upper[c] = min(bounds) if bounds else None
        value: dict = {}
        used = set(pinned.values())  # constants own their values outright
        for c in reversed(order):  # topological
            lows = [value[p] for p in preds[c]]
            lo = max(lows) if lows else None
            ub = upper[c]
            if c in pinned:
                v = pinned[c]
                if lo is not None and not lo < v:
                    raise RuntimeError("constant bound violated in consistent store")
            else:
                if lo is None and ub is None:
                    v = Fraction(0)
                elif lo is None:
                    v = ub - 1
                elif ub is None:
                    v = lo + 1
                else:
                    v = (lo + ub) / 2
                while v in used:
                    v = v + 1 if ub is None else (v + ub) / 2
            value[c] = v
            used.add(v)
        return {n: value[comp[cls[n]]] for n in self._parent}


def _tarjan_scc(nodes, adj) -> dict:
    """Iterative Tarjan; returns node -> component id (reverse topo order)."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comp = {}
    counter = itertools.count()
    next_comp = itertools.count()
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = next(counter)
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                cid = next(next_comp)
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    comp[top] = cid
                    if top == node:
                        break
            if work:
                parent_node = work[-1][0]
                low[parent_node] = min(low[parent_node], low[node])
    return comp


def conjunction_satisfiable(atoms: Iterable[OrderAtom],
                            fixed: Optional[dict] = None) -> bool:
    """Whether some rational assignment extends fixed and satisfies atoms."""
    store = ConjunctiveStore()
    if fixed:
        for var, val in fixed.items():
            store.add(var, "=", val)
    store.add_all(atoms)
    return store.satisfiable()


# ---------------------------------------------------------------------------
# point relations


@dataclass(frozen=True)
class PointRelation:
    """Union of weak-order types over grouped slots.

    groups partitions slot indices 0..arity-1 into comparability groups;
    a model assigns one weak order per group.  Membership of a concrete
    rational tuple depends only on its per-group induced weak orders.
    """

    arity: int
    groups: tuple[tuple[int, ...], ...]
    models: frozenset

    def __post_init__(self):
        flat = [i for g in self.groups for i in g]
        if sorted(flat) != list(range(self.arity)):
            raise ValueError("groups must partition the slot indices")
        for m in self.models:
            if len(m) != len(self.groups):
                raise ValueError("model has wrong group count")
            for w, g in zip(m, self.groups):
                if w.arity != len(g):
                    raise ValueError("model group arity mismatch")

    @staticmethod
    def single(k: int, weak_orders: Iterable[WeakOrder]) -> "PointRelation":
        return PointRelation(k, (tuple(range(k)),),
                             frozenset((w,) for w in weak_orders))

    def weak_orders(self) -> frozenset:
        if len(self.groups) != 1:
            raise ValueError("weak_orders() needs a single-group relation")
        return frozenset(m[0] for m in self.models)

    def config_of(self, values: Sequence) -> tuple:
        return tuple(weak_order_of([values[i] for i in g]) for g in self.groups)

    def contains_values(self, values: Sequence) -> bool:
        if len(values) != self.arity:
            raise ValueError(f"expected {self.arity} values, got {len(values)}")
        return self.config_of(values) in self.models

    def __len__(self):
        return len(self.models)

    def is_empty(self) -> bool:
        return not self.models

    def _check_compatible(self, other: "PointRelation"):
        if self.arity != other.arity or self.groups != other.groups:
            raise ValueError("point relations have different slot structure")

    def __or__(self, other):
        self._check_compatible(other)
        return PointRelation(self.arity, self.groups, self.models | other.models)

    def __and__(self, other):
        self._check_compatible(other)
        return PointRelation(self.arity, self.groups, self.models & other.models)


def _group_of_slots(calc: Calculus) -> dict:
    """slot name -> group index, for the X/Y pair scope of a calculus."""
    out = {}
    for gi, g in enumerate(calc.var_groups):
        for si in g:
            out["X" + calc.slot_suffixes[si]] = gi
            out["Y" + calc.slot_suffixes[si]] = gi
    return out


@lru_cache(maxsize=None)
def _basic_group_orders(calc_name: str, code) -> tuple:
    """Per-group sets of weak orders realizing one basic code.

    The code's definition and the domain atoms are evaluated groupwise
    (no definition compares slots across groups; asserted here), so the
    code's full model set is the product of the returned group sets.
    """
    from .relations import calculus_by_name

    calc = calculus_by_name(calc_name)
    slot_group = _group_of_slots(calc)
    dnf = calc.definition(code, "X", "Y")
    domain = calc.domain_atoms("X") + calc.domain_atoms("Y")
    for conj in dnf:
        for atom in tuple(conj) + domain:
            if slot_group[atom.lhs] != slot_group[atom.rhs]:
                raise AssertionError(
                    f"definition of {code!r} compares slots across groups")
    ngroups = len(calc.var_groups)
    # slot order within a group: X's slots then Y's slots
    group_slots = [[] for _ in range(ngroups)]
    for gi, g in enumerate(calc.var_groups):
        group_slots[gi] = (["X" + calc.slot_suffixes[si] for si in g]
                           + ["Y" + calc.slot_suffixes[si] for si in g])
    if len(dnf) > 1 and ngroups > 1:
        raise AssertionError("disjunctive definitions only in single-group calculi")
    result = []
    for gi in range(ngroups):
        slots = group_slots[gi]
        local_domain = tuple(a for a in domain if slot_group[a.lhs] == gi)
        local_dnf = tuple(
            tuple(a for a in conj if slot_group[a.lhs] == gi) for conj in dnf)
        good = []
        for w in enumerate_weak_orders(len(slots)):
            values = dict(zip(slots, w.ranks))
            if not _eval_conjunction(local_domain, values):
                continue
            if any(_eval_conjunction(conj, values) for conj in local_dnf):
                good.append(w)
        result.append(frozenset(good))
    return tuple(result)


def relation_of(rel: QualitativeRelation) -> PointRelation:
    """Endpoint-level semantics of a qualitative relation.

    Scope slot order is X's slots then Y's slots, in declaration order;
    domain strictness (interval validity, directed-interval distinctness)
    is folded into the models.
    """
    calc = rel.calculus
    ns = len(calc.slot_suffixes)
    groups = tuple(
        tuple(list(g) + [ns + i for i in g]) for g in calc.var_groups)
    models = set()
    for code in rel.codes():
        per_group = _basic_group_orders(calc.name, code)
        models.update(itertools.product(*per_group))
    return PointRelation(2 * ns, groups, frozenset(models))


# ---------------------------------------------------------------------------
# point instances


@dataclass(frozen=True)
class PointInstance:
    """CSP over (Q; <): conjunctive atoms plus grouped disjunctive constraints."""

    variables: tuple[str, ...]
    atoms: tuple[OrderAtom, ...] = ()
    grouped: tuple = ()  # of (scope: tuple of var names, rel: PointRelation)
    constants: tuple = ()  # of (var, Rational)

    def __post_init__(self):
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variable names")
        for atom in self.atoms:
            for side in (atom.lhs, atom.rhs):
                if isinstance(side, str) and side not in declared:
                    raise ValueError(f"atom on undeclared variable {side}")
        for scope, rel in self.grouped:
            if len(scope) != rel.arity:
                raise ValueError("scope length does not match relation arity")
            for v in scope:
                if v not in declared:
                    raise ValueError(f"constraint on undeclared variable {v}")
        for v, _ in self.constants:
            if v not in declared:
                raise ValueError(f"constant for undeclared variable {v}")

    def satisfied_by(self, assignment: dict) -> bool:
        values = {v: _q(assignment[v]) for v in self.variables}
        for v, c in self.constants:
            if values[v] != _q(c):
                return False
        if not _eval_conjunction(self.atoms, values):
            return False
        for scope, rel in self.grouped:
            if not rel.contains_values([values[v] for v in scope]):
                return False
        return True
