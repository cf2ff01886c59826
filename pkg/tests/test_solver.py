"""Instance grammar, solving strategies, witnesses, and report output."""
import itertools
import json
import random

import pytest

from qreason.interp import catalog, translate_instance
from qreason.points import PointInstance, PointRelation, WeakOrder
from qreason.relations import (
    CDC,
    DIA,
    IA,
    RA,
    DirectedInterval,
    Interval,
    OrderAtom,
    PlanePoint,
    QualInstance,
    relation_holds,
    relation,
)
from qreason.solver import (
    BRUTEFORCE_SLOT_CAP,
    ORD_AUTO_CAP,
    SolveError,
    SolveReport,
    homotopy_samples,
    parse_instance,
    point_clauses,
    point_encoding,
    random_element,
    render_instance,
    report_json,
    solve,
)

SF_TEXT = "algebra IA\nvars X Y\nX { s f } Y\n"


def ends(x):
    return tuple(int(e) for e in x.endpoints())


# ---------------------------------------------------------------------------
# grammar


def test_parse_ia_instance():
    inst = parse_instance("""
# two intervals
algebra IA
vars X Y
X { s f } Y   # starts or finishes
""")
    assert isinstance(inst, QualInstance)
    assert inst.calculus is IA
    assert inst.variables == ("X", "Y")
    (x, rel, y), = inst.constraints
    assert (x, y) == ("X", "Y")
    assert set(rel.codes()) == {"s", "f"}


def test_parse_block_tuple_codes():
    inst = parse_instance("algebra RA\nvars A B\nA { (s,p) (d,m) } B\n")
    assert inst.calculus is RA
    (_, rel, _), = inst.constraints
    assert set(rel.codes()) == {("s", "p"), ("d", "m")}


def test_parse_dia_forw():
    inst = parse_instance("algebra DIA\nvars U V\nforw U\nU { cb= } V\n")
    assert inst.calculus is DIA
    assert inst.forw_vars == ("U",)


def test_parse_point_instance():
    inst = parse_instance("""
algebra POINT
vars x y z
x < y
y <= z
x != z
x != y \\/ y = z
""")
    assert isinstance(inst, PointInstance)
    assert inst.atoms == (
        OrderAtom("x", "<", "y"),
        OrderAtom("y", "<=", "z"),
        OrderAtom("x", "!=", "z"),
    )
    # the disjunctive clause lands as a grouped relation over its variables
    (scope, rel), = inst.grouped
    assert scope == ("x", "y", "z")
    assert rel.arity == 3


@pytest.mark.parametrize("text,fragment", [
    ("vars X Y\n", "algebra must come first"),
    ("algebra IA\nalgebra IA\n", "line 2: algebra declared twice"),
    ("algebra XYZ\n", "line 1"),
    ("algebra IA\nvars X Y\nX { s } Z\n", "line 3: undeclared variable 'Z'"),
    ("algebra IA\nvars X Y\nX { nope } Y\n", "unknown IA code"),
    ("algebra IA\nvars X Y\nX { } Y\n", "line 3: empty constraint"),
    ("algebra IA\nvars X Y\nX { s } \n", "expected `X { codes }"),
    ("algebra IA\nvars X Y\nforw X\n", "forw is a DIA constraint"),
    ("algebra DIA\nvars U\nforw V\n", "undeclared variable 'V'"),
    ("algebra IA\nvars\n", "empty vars line"),
    ("algebra RA\nvars A B\nA { (s,p) huh } B\n", "stray text"),
    ("algebra POINT\nvars x\nx < y\n", "undeclared variable 'y'"),
    ("algebra POINT\nvars x y\nrel x y :\n", "malformed rel line"),
    ("algebra POINT\nvars x y\nrel x z : groups [0 1] ; models [0 1]\n",
     "undeclared variable 'z'"),
    ("algebra POINT\nvars x y\nrel x y : groups [0][1] ; models [0]\n",
     "group count mismatch"),
    ("algebra POINT\nvars x y\nrel x y : groups [0 1] ; models [0 2]\n",
     "line 3"),
    ("", "no algebra line"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(SolveError, match=fragment):
        parse_instance(text)


def test_parse_point_clause_error_keeps_line():
    with pytest.raises(SolveError, match="line 4"):
        parse_instance("algebra POINT\nvars x y\nx < y\nx ! y\n")


@pytest.mark.parametrize("text", [
    SF_TEXT,
    "algebra RA\nvars A B C\nA { (s,p) } B\nB { (m,m) (f,d) } C\n",
    "algebra DIA\nvars U V\nforw U\nforw V\nU { cb= } V\n",
    "algebra CDC\nvars P Q\nP { N NE W } Q\n",
    "algebra POINT\nvars x y z\nx < y\nx != y \\/ y = z\n",
])
def test_render_parse_round_trip(text):
    inst = parse_instance(text)
    again = parse_instance(render_instance(inst))
    assert type(again) is type(inst)
    assert again.variables == inst.variables
    if isinstance(inst, QualInstance):
        assert again.forw_vars == inst.forw_vars
        assert [(x, rel.codes(), y) for x, rel, y in again.constraints] == \
               [(x, rel.codes(), y) for x, rel, y in inst.constraints]
    else:
        assert again.atoms == inst.atoms
        assert again.grouped == inst.grouped


def test_rel_line_round_trip_preserves_models():
    inst = parse_instance("algebra RA\nvars A B\nA { (s,p) (d,m) } B\n")
    pinst = translate_instance(inst, catalog()["ra.J"])
    again = parse_instance(render_instance(pinst))
    assert again.atoms == pinst.atoms
    assert again.grouped == pinst.grouped


def test_render_rejects_constants():
    pinst = PointInstance(("x",), (), (), constants=(("x", 3),))
    with pytest.raises(SolveError, match="constants"):
        render_instance(pinst)


# ---------------------------------------------------------------------------
# point encoding


def test_point_encoding_shape():
    inst = parse_instance("algebra IA\nvars X Y\nX { p } Y\n")
    pinst = point_encoding(inst)
    assert pinst.variables == ("X-", "X+", "Y-", "Y+")
    assert OrderAtom("X-", "<", "X+") in pinst.atoms
    assert OrderAtom("Y-", "<", "Y+") in pinst.atoms
    (scope, rel), = pinst.grouped
    assert scope == ("X-", "X+", "Y-", "Y+")
    assert len(rel.models) == 1  # p pins one endpoint order


def test_point_encoding_forw_atom():
    inst = parse_instance("algebra DIA\nvars U V\nforw U\nU { e= } V\n")
    pinst = point_encoding(inst)
    assert OrderAtom("U-", "<", "U+") in pinst.atoms  # forw pins direction
    assert OrderAtom("U-", "!=", "U+") in pinst.atoms


# ---------------------------------------------------------------------------
# the worked examples


def test_mutual_starts_unsat():
    rep = solve(parse_instance("algebra IA\nvars X Y\nX { s } Y\nY { s } X\n"))
    assert not rep.satisfiable
    assert rep.witness is None


def test_precedes_cycle_unsat():
    rep = solve(parse_instance(
        "algebra IA\nvars X Y Z\nX { p } Y\nY { p } Z\nZ { p } X\n"))
    assert not rep.satisfiable


def test_starts_or_finishes_witness():
    rep = solve(parse_instance(SF_TEXT))
    assert rep.satisfiable
    assert ends(rep.witness["X"]) == (0, 1)
    assert ends(rep.witness["Y"]) == (0, 2)
    # s union f is not ORD-Horn definable, so auto backtracked
    assert rep.strategy == "backtracking"


def test_conjunctive_instance_uses_propagation():
    rep = solve(parse_instance("algebra IA\nvars X Y Z\nX { p } Y\nY { m } Z\n"))
    assert rep.satisfiable
    assert rep.strategy == "ordhorn"
    assert rep.firings > 0
    a, b, c = rep.witness["X"], rep.witness["Y"], rep.witness["Z"]
    assert relation_holds(relation(IA, ["p"]), a, b)
    assert relation_holds(relation(IA, ["m"]), b, c)


# ---------------------------------------------------------------------------
# strategies


def _random_qual(calc, codes_pool, nvars, ncons, rng, forw=()):
    names = [f"V{i}" for i in range(nvars)]
    cons = []
    for _ in range(ncons):
        x, y = rng.sample(names, 2)
        size = rng.randint(1, 3)
        cons.append((x, relation(calc, rng.sample(codes_pool, size)), y))
    return QualInstance(calc, tuple(names), tuple(cons), forw)


def test_strategy_agreement_random_ia():
    rng = random.Random(4)
    pool = list(IA.codes())
    for _ in range(25):
        inst = _random_qual(IA, pool, rng.randint(2, 4), rng.randint(1, 4), rng)
        reports = {m: solve(inst, m)
                   for m in ("auto", "backtracking", "bruteforce")}
        verdicts = {m: r.satisfiable for m, r in reports.items()}
        assert len(set(verdicts.values())) == 1, verdicts
        via = solve(inst, "translate:ia.J")
        assert via.satisfiable == reports["auto"].satisfiable


def test_strategy_agreement_random_cdc():
    rng = random.Random(5)
    pool = list(CDC.codes())
    for _ in range(25):
        inst = _random_qual(CDC, pool, rng.randint(2, 4), rng.randint(1, 4), rng)
        verdicts = {m: solve(inst, m).satisfiable
                    for m in ("auto", "backtracking", "bruteforce")}
        assert len(set(verdicts.values())) == 1, verdicts


def test_strategy_agreement_random_dia():
    rng = random.Random(6)
    pool = list(DIA.codes())
    for _ in range(15):
        nvars = rng.randint(2, 4)
        inst = _random_qual(DIA, pool, nvars, rng.randint(1, 3), rng,
                            forw=tuple(n for n in (f"V{i}" for i in range(nvars))
                                       if rng.random() < 0.4))
        verdicts = {m: solve(inst, m).satisfiable
                    for m in ("auto", "backtracking", "bruteforce")}
        assert len(set(verdicts.values())) == 1, verdicts


def test_witnesses_satisfy_instances():
    rng = random.Random(7)
    pool = list(IA.codes())
    seen_sat = 0
    for _ in range(20):
        inst = _random_qual(IA, pool, 3, 2, rng)
        for method in ("auto", "backtracking", "bruteforce"):
            rep = solve(inst, method)
            if rep.satisfiable:
                seen_sat += 1
                assert inst.satisfied_by(rep.witness)
    assert seen_sat > 10


def test_block_constraints_skip_the_clause_attempt():
    # 8-slot scopes are past ORD_AUTO_CAP, so auto goes straight to search
    assert ORD_AUTO_CAP < 8
    rep = solve(parse_instance("algebra RA\nvars A B\nA { (s,p) } B\n"))
    assert rep.satisfiable
    assert rep.strategy == "backtracking"


def test_explicit_ordhorn_rejects_non_definable():
    with pytest.raises(SolveError, match="not ORD-Horn definable"):
        solve(parse_instance(SF_TEXT), "ordhorn")


def test_explicit_ordhorn_on_definable_instance():
    rep = solve(parse_instance("algebra IA\nvars X Y\nX { p m } Y\n"), "ordhorn")
    assert rep.satisfiable
    assert rep.strategy == "ordhorn"
    assert relation_holds(relation(IA, ["p", "m"]), rep.witness["X"], rep.witness["Y"])


def test_point_clauses_renames_slots():
    inst = parse_instance("algebra IA\nvars X Y\nX { p m } Y\n")
    cs = point_clauses(point_encoding(inst))
    assert set(cs.variables) == {"X-", "X+", "Y-", "Y+"}
    names = {v for c in cs.clauses for v in c.variables()}
    assert names <= {"X-", "X+", "Y-", "Y+"}


def test_unknown_strategy():
    with pytest.raises(SolveError, match="unknown strategy"):
        solve(parse_instance(SF_TEXT), "guess")


def test_bruteforce_cap():
    text = "algebra IA\nvars " + " ".join(f"V{i}" for i in range(6)) + "\n"
    with pytest.raises(SolveError, match="exceed"):
        solve(parse_instance(text), "bruteforce")
    with pytest.raises(SolveError, match="exceed"):
        solve(parse_instance(SF_TEXT), "bruteforce", max_slots=3)
    assert BRUTEFORCE_SLOT_CAP == 10


def test_constants_rejected():
    pinst = PointInstance(("x", "y"), (OrderAtom("x", "<", "y"),),
                          constants=(("x", 0),))
    with pytest.raises(SolveError, match="constant"):
        solve(pinst)


def test_empty_grouped_relation_is_unsat():
    rel = PointRelation(2, ((0, 1),), frozenset())
    pinst = PointInstance(("x", "y"), (), ((("x", "y"), rel),))
    for method in ("auto", "backtracking", "bruteforce"):
        assert not solve(pinst, method).satisfiable


# ---------------------------------------------------------------------------
# translation strategy


def test_translate_strategy_reports_point_witness():
    rep = solve(parse_instance(SF_TEXT), "translate:ia.J")
    assert rep.satisfiable
    assert rep.strategy == "translate:ia.J"
    assert set(rep.witness) == {"X-", "X+", "Y-", "Y+"}
    w = rep.witness
    assert w["X-"] < w["X+"] and w["Y-"] < w["Y+"]


def test_translate_strategy_keeps_direction():
    rep = solve(parse_instance(
        "algebra DIA\nvars U V\nforw U\nforw V\nU { cb= } V\n"),
        "translate:dia.J")
    assert rep.satisfiable
    assert rep.witness["U-"] < rep.witness["U+"]
    assert rep.witness["V-"] < rep.witness["V+"]


def test_translate_strategy_name_checks():
    inst = parse_instance(SF_TEXT)
    with pytest.raises(SolveError, match="catalog"):
        solve(inst, "translate:nope")
    with pytest.raises(SolveError, match="catalog"):
        solve(inst, "translate:ia.s_from_m")  # defined relation, not a map
    with pytest.raises(SolveError, match="qualitative"):
        solve(parse_instance("algebra POINT\nvars x\n"), "translate:ia.J")


def test_translate_strategy_agreement():
    rng = random.Random(8)
    pool = list(DIA.codes())
    for _ in range(10):
        inst = _random_qual(DIA, pool, 3, 2, rng, forw=("V0",))
        direct = solve(inst, "backtracking").satisfiable
        assert solve(inst, "translate:dia.J").satisfiable == direct


# ---------------------------------------------------------------------------
# reports


def test_report_json_schema():
    rep = solve(parse_instance(SF_TEXT), seed=11)
    doc = json.loads(report_json(rep))
    assert set(doc) == {"satisfiable", "witness", "strategy", "stats",
                        "seed", "version"}
    assert doc["satisfiable"] is True
    assert doc["witness"] == {"X": [0, 1], "Y": [0, 2]}
    assert set(doc["stats"]) == {"nodes", "firings", "ms"}
    assert doc["seed"] == 11


def test_report_json_deterministic_modulo_ms():
    def normalized(text):
        doc = json.loads(text)
        doc["stats"]["ms"] = 0.0
        return doc

    for method in ("auto", "backtracking", "bruteforce", "translate:ia.J"):
        a = report_json(solve(parse_instance(SF_TEXT), method, seed=3))
        b = report_json(solve(parse_instance(SF_TEXT), method, seed=3))
        assert normalized(a) == normalized(b)


def test_unsat_report_json():
    rep = solve(parse_instance(
        "algebra IA\nvars X Y\nX { s } Y\nY { s } X\n"))
    doc = json.loads(report_json(rep))
    assert doc["satisfiable"] is False
    assert doc["witness"] is None


def test_witness_values_are_dense_ranks():
    rep = solve(parse_instance(
        "algebra POINT\nvars a b c d\na < b\nc < d\n"))
    values = sorted(rep.witness.values())
    assert values == sorted(set(values))
    assert values[0] == 0
    assert values[-1] == len(values) - 1


# ---------------------------------------------------------------------------
# random elements and homotopy sampling


def test_random_element_shapes():
    rng = random.Random(0)
    for _ in range(50):
        iv = random_element("IA", rng)
        assert isinstance(iv, Interval) and iv.lo < iv.hi
        pt = random_element("CDC", rng)
        assert isinstance(pt, PlanePoint)
        assert isinstance(random_element("POINT", rng), int)
    dirs = {random_element("DIA", random.Random(i)).forward for i in range(40)}
    assert dirs == {True, False}
    blk = random_element("BA3", rng)
    assert len(blk.endpoints()) == 6


def test_homotopy_samples_hit_the_domain():
    w = catalog()["ia.homotopy"]
    samples = list(homotopy_samples(w, 30, random.Random(1)))
    assert len(samples) == 30
    assert all(w.composed.in_domain(s) for s in samples)
    again = list(homotopy_samples(w, 30, random.Random(1)))
    assert again == samples


def test_homotopy_samples_draw_budget():
    w = catalog()["ia.homotopy"]
    with pytest.raises(SolveError, match="draws"):
        list(homotopy_samples(w, 5, random.Random(1), max_draws=0))
