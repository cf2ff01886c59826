"""Formula evaluation, the interpretation catalog, translation, homotopy."""
import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest

from qreason.formulas import POINT, PPFormula, RelAtom, eval_pp_formula
from qreason.interp import (
    CompositionError,
    HomotopyWitness,
    Interpretation,
    catalog,
    check_homotopy_identity,
    compose,
    eliminate_forw,
    identity_interpretation,
    translate_instance,
)
from qreason.points import PointInstance, rank_matrix, relation_of
from qreason.relations import (
    CDC,
    DIA,
    IA,
    RA,
    Block,
    CalculusError,
    DirectedInterval,
    Interval,
    OrderAtom,
    PlanePoint,
    QualInstance,
    block,
    classify_pair,
    holds,
    relation,
    relation_holds,
)


# ---------------------------------------------------------------------------
# weak-order oracles (vectorized; independent of the translation code)


def _conj_mask(M, index, conj):
    mask = np.ones(len(M), dtype=bool)
    for a in conj:
        lhs = M[:, index[a.lhs]]
        rhs = M[:, index[a.rhs]]
        if a.op == "<":
            mask &= lhs < rhs
        elif a.op == "<=":
            mask &= lhs <= rhs
        elif a.op == "=":
            mask &= lhs == rhs
        else:
            mask &= lhs != rhs
    return mask


def qual_satisfiable(inst: QualInstance) -> bool:
    calc = inst.calculus
    slots = [s for v in inst.variables for s in calc.slots_for(v)]
    index = {s: i for i, s in enumerate(slots)}
    M = rank_matrix(len(slots))
    mask = np.ones(len(M), dtype=bool)
    for v in inst.variables:
        mask &= _conj_mask(M, index, calc.domain_atoms(v))
    for v in inst.forw_vars:
        mask &= _conj_mask(M, index, calc.unary_definition("forw", v)[0])
    for x, rel, y in inst.constraints:
        sub = np.zeros(len(M), dtype=bool)
        for code in rel.codes():
            for conj in calc.definition(code, x, y):
                sub |= _conj_mask(M, index, conj)
        mask &= sub
    return bool(mask.any())


def point_satisfiable(pinst: PointInstance) -> bool:
    slots = list(pinst.variables)
    index = {s: i for i, s in enumerate(slots)}
    M = rank_matrix(len(slots))
    mask = _conj_mask(M, index, pinst.atoms)
    for scope, rel in pinst.grouped:
        cols = [index[v] for v in scope]
        sub = np.zeros(len(M), dtype=bool)
        for model in rel.models:
            m = np.ones(len(M), dtype=bool)
            for gi, g in enumerate(rel.groups):
                w = model[gi]
                for a in range(len(g)):
                    for b in range(a + 1, len(g)):
                        ca = M[:, cols[g[a]]]
                        cb = M[:, cols[g[b]]]
                        if w.ranks[a] < w.ranks[b]:
                            m &= ca < cb
                        elif w.ranks[a] == w.ranks[b]:
                            m &= ca == cb
                        else:
                            m &= ca > cb
            sub |= m
        mask &= sub
    return bool(mask.any())


# ---------------------------------------------------------------------------
# realizations of every basic configuration


def basic_pairs(calc):
    """One concrete element pair per basic configuration."""
    out = []
    for code in calc.codes():
        rel = relation_of(relation(calc, [code]))
        model = sorted(rel.models)[0]
        ranks = [None] * rel.arity
        offset = 0
        for gi, g in enumerate(rel.groups):
            for slot_pos, r in zip(g, model[gi].ranks):
                ranks[slot_pos] = F(r) + offset
            offset += 100  # groups are incomparable; keep them apart anyway
        ns = rel.arity // 2
        a = calc.make_element(tuple(ranks[:ns]))
        b = calc.make_element(tuple(ranks[ns:]))
        assert classify_pair(calc, a, b) == code
        out.append((code, a, b))
    return out


def test_eval_point_formula():
    between = PPFormula(POINT, ("x", "y"), ("z",),
                        (OrderAtom("x", "<", "z"), OrderAtom("z", "<", "y")))
    assert eval_pp_formula(between, {"x": 0, "y": 1})
    assert not eval_pp_formula(between, {"x": 1, "y": 1})
    with pytest.raises(ValueError):
        eval_pp_formula(between, {"x": 0})


def test_formula_validation():
    with pytest.raises(ValueError):
        PPFormula("IA", ("X",), ("X",), ())
    with pytest.raises(ValueError):
        PPFormula("IA", ("X", "Y"), (), (RelAtom("nope", ("X", "Y")),))
    with pytest.raises(ValueError):
        PPFormula("IA", ("X",), (), (RelAtom("s", ("X", "Y")),))
    with pytest.raises(ValueError):
        PPFormula(POINT, ("x",), (), (RelAtom("s", ("x", "x")),))
    # star codes only make sense on block algebras
    PPFormula("RA", ("X", "Y"), (), (RelAtom(("s", "*"), ("X", "Y")),))
    with pytest.raises(ValueError):
        PPFormula("IA", ("X", "Y"), (), (RelAtom(("s", "*"), ("X", "Y")),))


def test_eval_star_code():
    f = PPFormula("RA", ("X", "Y"), (), (RelAtom(("s", "*"), ("X", "Y")),))
    for code, a, b in basic_pairs(RA):
        assert eval_pp_formula(f, {"X": a, "Y": b}) == (code[0] == "s")


def test_eval_forw_atom():
    f = PPFormula("DIA", ("X",), (), (RelAtom("forw", ("X",)),))
    assert eval_pp_formula(f, {"X": DirectedInterval(0, 1)})
    assert not eval_pp_formula(f, {"X": DirectedInterval(1, 0)})


# ---------------------------------------------------------------------------
# catalog: projection formulas against endpoint oracles


CAT = catalog()


def _element_grid(calc):
    if calc is IA:
        vals = [F(0), F(1), F(2), F(3)]
        return [Interval(a, b) for a, b in itertools.combinations(vals, 2)]
    if calc is CDC:
        vals = [F(0), F(1), F(2)]
        return [PlanePoint(x, y) for x in vals for y in vals]
    if calc is DIA:
        vals = [F(0), F(1), F(2)]
        return [DirectedInterval(a, b) for a in vals for b in vals if a != b]
    raise AssertionError


@pytest.mark.parametrize("name,proj,domain", [
    ("ia.I1", lambda e: e.lo, lambda e: True),
    ("ia.I2", lambda e: e.hi, lambda e: True),
    ("cdc.I1", lambda e: e.x, lambda e: True),
    ("cdc.I2", lambda e: e.y, lambda e: True),
    ("dia.I1", lambda e: e.start, lambda e: e.forward),
    ("dia.I2", lambda e: e.end, lambda e: e.forward),
])
def test_projection_interpretations(name, proj, domain):
    interp = CAT[name]
    calc_elements = _element_grid(
        {"IA": IA, "CDC": CDC, "DIA": DIA}[interp.source])
    f_lt = interp.relation_formulas["<"]
    f_eq = interp.relation_formulas["="]
    for a in calc_elements:
        assert interp.in_domain((a,)) == domain(a)
        got = interp.coordinate_map((a,))
        assert got == (proj(a) if domain(a) else None)
        for b in calc_elements:
            if not (domain(a) and domain(b)):
                continue
            env = {"X": a, "Y": b}
            assert eval_pp_formula(f_lt, env) == (proj(a) < proj(b))
            assert eval_pp_formula(f_eq, env) == (proj(a) == proj(b))


def test_ra_projection_interpretations():
    pairs = [Interval(a, b) for a, b in
             itertools.combinations([F(0), F(1), F(2)], 2)]
    blocks = [Block((h, v)) for h in pairs for v in pairs]
    projs = {
        "ra.I1": lambda e: e.axes[0].lo,
        "ra.I2": lambda e: e.axes[0].hi,
        "ra.I3": lambda e: e.axes[1].lo,
        "ra.I4": lambda e: e.axes[1].hi,
    }
    for name, proj in projs.items():
        interp = CAT[name]
        for a in blocks:
            assert interp.coordinate_map((a,)) == proj(a)
            for b in blocks:
                env = {"X": a, "Y": b}
                assert eval_pp_formula(
                    interp.relation_formulas["<"], env) == (proj(a) < proj(b))
                assert eval_pp_formula(
                    interp.relation_formulas["="], env) == (proj(a) == proj(b))


def _point_env(formula, a, b):
    k = len(formula.free_vars) // 2
    values = list(a.endpoints()) + list(b.endpoints())
    return dict(zip(formula.free_vars, values))


@pytest.mark.parametrize("calc,jname", [
    (IA, "ia.J"), (RA, "ra.J"), (CDC, "cdc.J"),
])
def test_point_side_formulas_match_basics(calc, jname):
    J = CAT[jname]
    pairs = basic_pairs(calc)
    for code in calc.codes():
        f = J.relation_formulas[code]
        for actual, a, b in pairs:
            env = _point_env(f, a, b)
            assert eval_pp_formula(f, env) == (actual == code)


def test_cdc_point_formulas_on_coincident_points():
    J = CAT["cdc.J"]
    a = PlanePoint(F(1), F(2))
    env = _point_env(J.relation_formulas["="], a, a)
    assert eval_pp_formula(J.relation_formulas["="], env)
    for code in CDC.codes():
        assert not eval_pp_formula(J.relation_formulas[code], env)


def test_dia_point_formulas_on_forward_pairs():
    J = CAT["dia.J"]
    forward = [DirectedInterval(a, b)
               for a, b in itertools.combinations([F(0), F(1), F(2), F(3)], 2)]
    for a in forward:
        for b in forward:
            env = _point_env(J.relation_formulas["cb="], a, b)
            for code in DIA.codes():
                assert eval_pp_formula(J.relation_formulas[code], env) \
                    == holds(DIA, code, a, b)
            assert eval_pp_formula(J.relation_formulas["="], env) == (a == b)


def test_ra_padded_formulas():
    J = CAT["ra.J"]
    for code, a, b in basic_pairs(RA):
        env = _point_env(J.relation_formulas[("s", "*")], a, b)
        assert eval_pp_formula(J.relation_formulas[("s", "*")], env) \
            == (code[0] == "s")
        assert eval_pp_formula(J.relation_formulas[("f", "*")], env) \
            == (code[0] == "f")
        assert eval_pp_formula(J.relation_formulas[("*", "s")], env) \
            == (code[1] == "s")
        assert eval_pp_formula(J.relation_formulas[("*", "f")], env) \
            == (code[1] == "f")


def test_derived_relation_formulas():
    for code, a, b in basic_pairs(IA):
        env = {"X": a, "Y": b}
        assert eval_pp_formula(CAT["ia.s_from_m"], env) == (code == "s")
        assert eval_pp_formula(CAT["ia.f_from_m"], env) == (code == "f")
    for code, a, b in basic_pairs(RA):
        env = {"X": a, "Y": b}
        assert eval_pp_formula(CAT["ra.s_top"], env) == (code[0] == "s")
    for code, a, b in basic_pairs(CDC):
        env = {"X": a, "Y": b}
        assert eval_pp_formula(CAT["cdc.ne_from_n_e"], env) == (code == "NE")


def test_catalog_is_read_only():
    with pytest.raises(TypeError):
        CAT["ia.J"] = None
    with pytest.raises(TypeError):
        CAT["ia.J"].relation_formulas["s"] = None


# ---------------------------------------------------------------------------
# composition


def test_compose_dimension_law():
    assert CAT["ia.homotopy"].composed.dimension == 2
    assert CAT["ra.homotopy"].composed.dimension == 4
    assert CAT["cdc.homotopy"].composed.dimension == 2
    assert CAT["dia.homotopy"].composed.dimension == 2


def test_compose_identity():
    ident = identity_interpretation("IA")
    comp = compose(ident, (ident,))
    assert comp.dimension == 1
    x = Interval(F(0), F(2))
    assert comp.coordinate_map((x,)) == x
    y = Interval(F(0), F(3))
    for code in IA.codes():
        f = comp.relation_formulas[code]
        env = dict(zip(f.free_vars, (x, y)))
        assert eval_pp_formula(f, env) == holds(IA, code, x, y)


def test_compose_errors():
    with pytest.raises(CompositionError):
        compose(CAT["ia.J"], (CAT["ia.I1"],))
    with pytest.raises(CompositionError):
        compose(CAT["ia.J"], (CAT["ia.I1"], CAT["cdc.I1"]))
    with pytest.raises(CompositionError):
        compose(CAT["ia.J"], (CAT["ia.I1"], CAT["ia.I2"]))  # cross domain, no theta


def test_composed_maps():
    ia = CAT["ia.homotopy"].composed
    assert ia.coordinate_map((Interval(F(0), F(1)), Interval(F(1, 2), F(2)))) \
        == Interval(F(0), F(2))
    # defined whenever the start precedes the other finish
    assert ia.coordinate_map((Interval(F(0), F(1)), Interval(F(-1), F(2)))) \
        == Interval(F(0), F(2))
    assert ia.coordinate_map((Interval(F(5), F(6)), Interval(F(0), F(1)))) is None

    ra = CAT["ra.homotopy"].composed
    w = (block((0, 1), (0, 1)), block((0, 2), (0, 1)),
         block((0, 1), (0, 3)), block((0, 1), (0, 4)))
    assert ra.coordinate_map(w) == block((0, 2), (0, 4))

    cdc = CAT["cdc.homotopy"].composed
    assert cdc.coordinate_map((PlanePoint(F(1), F(5)), PlanePoint(F(7), F(2)))) \
        == PlanePoint(F(1), F(2))

    dia = CAT["dia.homotopy"].composed
    assert dia.coordinate_map(
        (DirectedInterval(F(0), F(1)), DirectedInterval(F(1, 2), F(2)))) \
        == DirectedInterval(F(0), F(2))
    # backward input falls outside the forward-fragment projections
    assert dia.coordinate_map(
        (DirectedInterval(F(1), F(0)), DirectedInterval(F(1, 2), F(2)))) is None


# ---------------------------------------------------------------------------
# homotopy identity


def test_homotopy_ia_examples():
    w = CAT["ia.homotopy"]
    good = (Interval(F(0), F(1)), Interval(F(1, 2), F(2)))
    res = check_homotopy_identity(w, [good])
    assert res and res.checked == 1 and not res.skipped

    outside = (Interval(F(0), F(1)), Interval(F(-1), F(2)))
    res = check_homotopy_identity(w, [outside])
    assert res and res.checked == 0
    assert res.skipped[0][1] == "outside the composed domain"


def test_homotopy_ra_example():
    w = CAT["ra.homotopy"]
    sample = (block((0, 1), (10, 11)), block((1, 2), (10, 11)),
              block((5, 6), (0, 3)), block((5, 6), (1, 4)))
    res = check_homotopy_identity(w, [sample])
    assert res and res.checked == 1
    assert w.composed.coordinate_map(sample) == block((0, 2), (0, 4))
    # equal finishing coordinates break the strict f witness
    flat = (block((0, 1), (10, 11)), block((0, 2), (10, 11)),
            block((5, 6), (0, 3)), block((5, 6), (0, 4)))
    res = check_homotopy_identity(w, [flat])
    assert res.checked == 0 and len(res.skipped) == 1


def test_homotopy_cdc_is_total():
    w = CAT["cdc.homotopy"]
    grid = _element_grid(CDC)
    samples = [(u, v) for u in grid for v in grid]
    res = check_homotopy_identity(w, samples)
    assert res and res.checked == len(samples) and not res.skipped


def test_homotopy_random_samples():
    rng = random.Random(7)

    def rational(lo=-6, hi=6):
        return F(rng.randint(2 * lo, 2 * hi), rng.choice([1, 2]))

    def interval():
        a, b = rational(), rational()
        while a == b:
            b = rational()
        return Interval(min(a, b), max(a, b))

    ia = CAT["ia.homotopy"]
    res = check_homotopy_identity(
        ia, [(interval(), interval()) for _ in range(60)])
    assert res and res.checked > 0

    dia = CAT["dia.homotopy"]
    def directed():
        iv = interval()
        return DirectedInterval(iv.lo, iv.hi) if rng.random() < 0.7 \
            else DirectedInterval(iv.hi, iv.lo)
    res = check_homotopy_identity(
        dia, [(directed(), directed()) for _ in range(60)])
    assert res and res.checked > 0 and res.skipped


def test_homotopy_detects_a_wrong_witness():
    bad_theta = PPFormula("IA", ("Z", "X", "Y"), (), (
        RelAtom("s", ("X", "Z")),))  # pins only the start: Z+ is loose
    w = HomotopyWitness(CAT["ia.homotopy"].composed, bad_theta)
    res = check_homotopy_identity(
        w, [(Interval(F(0), F(1)), Interval(F(1, 2), F(2)))])
    assert not res
    assert "not pinned" in res.counterexample[1]


# ---------------------------------------------------------------------------
# translation


def test_translate_single_basic_is_plain_atoms():
    inst = QualInstance(IA, ("X", "Y"), (("X", relation(IA, ["s"]), "Y"),))
    pt = translate_instance(inst, CAT["ia.J"])
    assert pt.variables == ("X-", "X+", "Y-", "Y+")
    assert not pt.grouped
    assert set(pt.atoms) == {
        OrderAtom("X-", "<", "X+"), OrderAtom("Y-", "<", "Y+"),
        OrderAtom("X-", "=", "Y-"), OrderAtom("X+", "<", "Y+")}


def test_translate_empty_instance_keeps_domain_atoms():
    inst = QualInstance(IA, ("X",), ())
    pt = translate_instance(inst, CAT["ia.J"])
    assert pt.atoms == (OrderAtom("X-", "<", "X+"),)
    assert not pt.grouped


def test_translate_disjunction_is_grouped():
    rel = relation(IA, ["p", "m"])
    inst = QualInstance(IA, ("X", "Y"), (("X", rel, "Y"),))
    pt = translate_instance(inst, CAT["ia.J"])
    ((scope, grouped),) = pt.grouped
    assert scope == ("X-", "X+", "Y-", "Y+")
    expected = relation_of(relation(IA, ["p"])) | relation_of(relation(IA, ["m"]))
    assert grouped.models == expected.models


def test_translate_missing_formula_errors():
    stripped = Interpretation(
        name="ia.J.partial", source=POINT, target="IA", dimension=2,
        domain_formula=CAT["ia.J"].domain_formula,
        relation_formulas={"s": CAT["ia.J"].relation_formulas["s"],
                           "=": CAT["ia.J"].relation_formulas["="]},
        coordinate_map=CAT["ia.J"].coordinate_map)
    inst = QualInstance(IA, ("X", "Y"), (("X", relation(IA, ["m"]), "Y"),))
    with pytest.raises(CalculusError, match="no relation formula"):
        translate_instance(inst, stripped)


def _random_relation(rng, calc):
    codes = list(calc.codes())
    picked = rng.sample(codes, rng.randint(1, min(3, len(codes))))
    return relation(calc, picked)


def _random_instance(rng, calc, max_vars=3):
    n = rng.randint(2, max_vars)
    names = [f"V{i}" for i in range(n)]
    pairs = list(itertools.combinations(names, 2))
    rng.shuffle(pairs)
    constraints = tuple(
        (x, _random_relation(rng, calc), y)
        for x, y in pairs[: rng.randint(1, len(pairs))])
    forw = ()
    if calc is DIA and rng.random() < 0.6:
        forw = tuple(v for v in names if rng.random() < 0.5)
    return QualInstance(calc, tuple(names), constraints, forw_vars=forw)


@pytest.mark.parametrize("calc,jname,max_vars", [
    (IA, "ia.J", 3), (CDC, "cdc.J", 4), (DIA, "dia.J", 3), (RA, "ra.J", 2),
])
def test_translation_equisatisfiable(calc, jname, max_vars):
    rng = random.Random(hash(jname) % 100000)
    J = CAT[jname]
    for _ in range(25):
        inst = _random_instance(rng, calc, max_vars)
        direct = qual_satisfiable(inst)
        translated = point_satisfiable(translate_instance(inst, J))
        assert direct == translated, inst


def test_translation_after_forw_elimination():
    rng = random.Random(11)
    J = CAT["dia.J"]
    for _ in range(25):
        # two fresh vars per chain link; keep the oracle inside 8 slots
        inst = _random_instance(rng, DIA, 2)
        reduced = eliminate_forw(inst)
        assert not reduced.forw_vars
        assert qual_satisfiable(inst) == qual_satisfiable(reduced)
        assert qual_satisfiable(reduced) \
            == point_satisfiable(translate_instance(reduced, J))


def test_eliminate_forw_shapes():
    one = QualInstance(DIA, ("X",), (), forw_vars=("X",))
    out = eliminate_forw(one)
    assert out.constraints == () and out.forw_vars == ()

    two = QualInstance(DIA, ("X", "Y"), (), forw_vars=("X", "Y"))
    out = eliminate_forw(two)
    assert len(out.variables) == 4 and len(out.constraints) == 3
    codes = sorted(r.codes() for _, r, _ in out.constraints)
    assert codes == [("e=",), ("e=",), ("eq=",)]


def test_eliminate_forw_rejects_other_calculi():
    inst = QualInstance(IA, ("X",), ())
    with pytest.raises(CalculusError):
        eliminate_forw(inst)


def test_point_to_interval_translation():
    pinst = PointInstance(("a", "b"), atoms=(OrderAtom("a", "<", "b"),))
    q = translate_instance(pinst, CAT["ia.I1"])
    assert q.calculus is IA
    assert set(q.variables) >= {"a", "b"}
    # every solution must put a's start before b's start
    vals = [F(0), F(1), F(2), F(3)]
    grid = [Interval(x, y) for x, y in itertools.combinations(vals, 2)]
    found = False
    for combo in itertools.product(grid, repeat=len(q.variables)):
        env = dict(zip(q.variables, combo))
        if all(relation_holds(r, env[x], env[y]) for x, r, y in q.constraints):
            found = True
            assert env["a"].lo < env["b"].lo
    assert found


def test_point_to_dia_translation_adds_forw():
    pinst = PointInstance(("a", "b"), atoms=(OrderAtom("a", "<", "b"),))
    q = translate_instance(pinst, CAT["dia.I1"])
    assert q.calculus is DIA
    assert set(q.forw_vars) == set(q.variables)


def test_point_translation_rejections():
    I1 = CAT["ia.I1"]
    with pytest.raises(CalculusError):
        translate_instance(
            PointInstance(("a",), constants=(("a", F(1)),)), I1)
    with pytest.raises(CalculusError):
        translate_instance(
            PointInstance(("a", "b"), atoms=(OrderAtom("a", "!=", "b"),)), I1)
    rel = relation_of(relation(IA, ["s"]))
    with pytest.raises(CalculusError):
        translate_instance(
            PointInstance(tuple("abcd"), grouped=((tuple("abcd"), rel),)), I1)
