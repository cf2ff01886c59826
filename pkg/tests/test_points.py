"""Point language: weak orders, the conjunctive store, point relations."""

import itertools
from fractions import Fraction as F
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreason import (
    CDC,
    DIA,
    IA,
    RA,
    ConjunctiveStore,
    OrderAtom,
    PointInstance,
    PointRelation,
    WeakOrder,
    conjunction_satisfiable,
    enumerate_weak_orders,
    full_relation,
    iter_weak_orders,
    rank_matrix,
    relation,
    relation_of,
    weak_order_of,
)


def ordered_bell(n: int) -> int:
    # a(n) = sum_{k=1..n} C(n,k) a(n-k); independent of the enumerator
    if n == 0:
        return 1
    return sum(comb(n, k) * ordered_bell(n - k) for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# weak orders


def test_weak_order_canonical_validation():
    WeakOrder((0, 1, 0, 2))
    with pytest.raises(ValueError):
        WeakOrder((0, 2))  # gap
    with pytest.raises(ValueError):
        WeakOrder((1, 2))  # does not start at 0
    with pytest.raises(ValueError):
        WeakOrder(())


def test_weak_order_of_examples():
    assert weak_order_of((0, 0, 2, 2)).ranks == (0, 0, 1, 1)
    assert weak_order_of((F(-1), F(-1), F(1), F(2))).ranks == (0, 0, 1, 2)
    assert weak_order_of((5,)).ranks == (0,)


def test_enumeration_counts_match_ordered_bell():
    for k in range(1, 8):
        orders = enumerate_weak_orders(k)
        assert len(orders) == ordered_bell(k)
        assert len(set(orders)) == len(orders)
    assert len(enumerate_weak_orders(2)) == 3
    assert len(enumerate_weak_orders(4)) == 75


def test_enumeration_cap_is_loud():
    with pytest.raises(ValueError):
        enumerate_weak_orders(11)
    with pytest.raises(ValueError):
        list(iter_weak_orders(0))


def test_rank_matrix_agrees_with_enumeration():
    for k in range(1, 7):
        rows = {tuple(r) for r in rank_matrix(k).tolist()}
        assert rows == {w.ranks for w in enumerate_weak_orders(k)}
    assert rank_matrix(8).shape == (ordered_bell(8), 8)
    assert rank_matrix(8).dtype == np.int8
    with pytest.raises(ValueError):
        rank_matrix(9)


# ---------------------------------------------------------------------------
# conjunctive store


def test_store_spec_examples():
    assert not conjunction_satisfiable(
        [OrderAtom("x", "<", "y"), OrderAtom("y", "<", "z"), OrderAtom("z", "<", "x")])
    assert conjunction_satisfiable(
        [OrderAtom("x", "<", "y"), OrderAtom("y", "<", "z")])
    assert not conjunction_satisfiable(
        [OrderAtom("x", "=", "y"), OrderAtom("x", "!=", "y")])


def test_store_weak_cycle_forces_equality():
    atoms = [OrderAtom("x", "<=", "y"), OrderAtom("y", "<=", "x")]
    assert conjunction_satisfiable(atoms)
    assert not conjunction_satisfiable(atoms + [OrderAtom("x", "!=", "y")])
    store = ConjunctiveStore()
    store.add_all(atoms)
    assert store.forced_equal("x", "y")
    assert not store.forced_equal("x", "z")


def test_store_constant_spine():
    assert conjunction_satisfiable(
        [OrderAtom(F(0), "<", "x"), OrderAtom("x", "<", F(1))])
    assert not conjunction_satisfiable(
        [OrderAtom(F(1), "<", "x"), OrderAtom("x", "<", F(0))])
    assert not conjunction_satisfiable(
        [OrderAtom("x", "=", F(0)), OrderAtom("x", "=", F(1))])
    # fixed assignments enter through the same mechanism
    assert not conjunction_satisfiable(
        [OrderAtom("x", "<", "y")], fixed={"x": F(3), "y": F(2)})


atom_ops = st.sampled_from(["<", "<=", "=", "!="])
var_names = st.sampled_from(["a", "b", "c", "d"])
small_consts = st.sampled_from([F(0), F(2)])
terms = st.one_of(var_names, small_consts)


@st.composite
def atom_sets(draw):
    n = draw(st.integers(min_value=1, max_value=7))
    atoms = []
    for _ in range(n):
        lhs = draw(terms)
        rhs = draw(terms)
        if not isinstance(lhs, str) and not isinstance(rhs, str):
            rhs = draw(var_names)
        atoms.append(OrderAtom(lhs, draw(atom_ops), rhs))
    return atoms


def _brute_force_satisfiable(atoms):
    """Exhaustive check over weak orders of all terms (variables + constants)."""
    slots = sorted({t for a in atoms for t in (a.lhs, a.rhs)}, key=repr)
    consts = [s for s in slots if not isinstance(s, str)]
    for w in enumerate_weak_orders(len(slots)):
        val = dict(zip(slots, w.ranks))
        ok = True
        for c1, c2 in itertools.combinations(consts, 2):
            if (val[c1] < val[c2]) != (c1 < c2):
                ok = False
                break
        if not ok:
            continue
        for lhs, op, rhs in atoms:
            a, b = val[lhs], val[rhs]
            if not (a < b if op == "<" else a <= b if op == "<=" else
                    a == b if op == "=" else a != b):
                ok = False
                break
        if ok:
            return True
    return False


@settings(max_examples=150, deadline=None)
@given(atom_sets())
def test_store_agrees_with_exhaustive_search(atoms):
    assert conjunction_satisfiable(atoms) == _brute_force_satisfiable(atoms)


@settings(max_examples=150, deadline=None)
@given(atom_sets())
def test_witness_satisfies_all_atoms(atoms):
    store = ConjunctiveStore()
    store.add_all(atoms)
    w = store.witness()
    if w is None:
        assert not _brute_force_satisfiable(atoms)
        return
    for lhs, op, rhs in atoms:
        a = w[lhs if isinstance(lhs, str) else F(lhs)]
        b = w[rhs if isinstance(rhs, str) else F(rhs)]
        assert (a < b if op == "<" else a <= b if op == "<=" else
                a == b if op == "=" else a != b)
    for c in w:
        if not isinstance(c, str):
            assert w[c] == c  # constants evaluate to themselves


# ---------------------------------------------------------------------------
# point relations


def test_relation_of_counts():
    assert len(relation_of(full_relation(IA))) == 13
    assert len(relation_of(full_relation(CDC))) == 8
    assert len(relation_of(relation(IA, ["s"]))) == 1


def test_ia_s_model_is_the_expected_ranking():
    (model,) = relation_of(relation(IA, ["s"])).models
    assert model[0].ranks == (0, 1, 0, 2)  # X-=Y- below X+ below Y+


def test_ra_top_has_169_grouped_models():
    pr = relation_of(full_relation(RA))
    assert pr.groups == ((0, 1, 4, 5), (2, 3, 6, 7))
    assert len(pr) == 169
    # independent product oracle: one model per axis pair of IA basics
    per_axis = {m[0] for m in relation_of(full_relation(IA)).models}
    assert pr.models == frozenset(itertools.product(per_axis, per_axis))


def test_dia_top_model_count_by_oracle():
    # oracle: weak orders on 4 slots with both domain disequalities whose
    # realization is classified into the fragment
    from qreason import DirectedInterval, classify_pair

    pr = relation_of(full_relation(DIA))
    expect = set()
    for w in enumerate_weak_orders(4):
        r = w.ranks
        if r[0] == r[1] or r[2] == r[3]:
            continue
        a = DirectedInterval(r[0], r[1])
        b = DirectedInterval(r[2], r[3])
        if classify_pair(DIA, a, b) is not None:
            expect.add((w,))
    assert pr.models == frozenset(expect)
    assert len(pr) == 10


def test_grouped_membership_uses_per_group_orders():
    pr = relation_of(relation(CDC, ["N"]))
    assert pr.groups == ((0, 2), (1, 3))
    # (Xx, Xy, Yx, Yy): north means same x, larger y
    assert pr.contains_values([F(0), F(2), F(0), F(1)])
    assert not pr.contains_values([F(0), F(2), F(1), F(1)])
    with pytest.raises(ValueError):
        pr.contains_values([F(0), F(1)])


def test_point_relation_set_ops_need_same_structure():
    a = relation_of(relation(IA, ["s"]))
    b = relation_of(relation(IA, ["f"]))
    assert len(a | b) == 2
    assert (a & b).is_empty()
    with pytest.raises(ValueError):
        a | relation_of(relation(CDC, ["N"]))
    with pytest.raises(ValueError):
        PointRelation.single(2, [weak_order_of((0, 1))]).weak_orders() and \
            relation_of(full_relation(RA)).weak_orders()


def test_point_instance_evaluation():
    inst = PointInstance(
        variables=("a", "b", "c"),
        atoms=(OrderAtom("a", "<", "b"),),
        grouped=(((("a", "b", "c")), PointRelation.single(
            3, [weak_order_of((0, 1, 2))])),),
        constants=(("a", F(0)),),
    )
    assert inst.satisfied_by({"a": F(0), "b": F(1), "c": F(2)})
    assert not inst.satisfied_by({"a": F(0), "b": F(1), "c": F(1)})
    assert not inst.satisfied_by({"a": F(1), "b": F(2), "c": F(3)})
    with pytest.raises(ValueError):
        PointInstance(("a",), atoms=(OrderAtom("a", "<", "zz"),))
