"""Interpretations between the calculi and the rational order.

An Interpretation is a triple (dimension, domain formula, coordinate
map) together with one formula per target relation code.  The formulas
are the syntactic object; the coordinate map is the same data in
executable form, so composition and homotopy facts can be checked on
concrete elements rather than argued abstractly.

The catalog holds the standard interpretations: each calculus into the
point structure (the J entries), the point structure into each calculus
(the I entries), homotopy witnesses for the composites, and a few
standalone defined relations (s and f from m; (s,TOP) from (s,p)).
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Optional

from .formulas import POINT, PPFormula, RelAtom, eval_pp_formula
from .points import PointInstance, relation_of
from .relations import (
    CDC_AXES,
    DIA,
    IA,
    IA_CODES,
    RA,
    Block,
    CalculusError,
    DirectedInterval,
    Interval,
    OrderAtom,
    PlanePoint,
    QualInstance,
    _q,
    calculus_by_name,
    relation,
)


@dataclass(frozen=True)
class Interpretation:
    """Structure `target` seen inside structure `source`, dimension k."""

    name: str
    source: str
    target: str
    dimension: int
    domain_formula: PPFormula
    relation_formulas: MappingProxyType
    coordinate_map: Callable
    derived_codes: frozenset = frozenset()
    note: str = ""

    def __post_init__(self):
        if self.domain_formula.structure != self.source:
            raise CalculusError("domain formula is over the wrong structure")
        if self.domain_formula.arity != self.dimension:
            raise CalculusError("domain formula arity != dimension")
        for code, f in self.relation_formulas.items():
            if f.structure != self.source:
                raise CalculusError(f"formula for {code!r} over wrong structure")
            ar = 1 if code == "forw" else 2
            if f.arity != ar * self.dimension:
                raise CalculusError(f"formula for {code!r} has arity {f.arity}")

    def __repr__(self):
        return (f"Interpretation({self.name}: {self.target} in {self.source}, "
                f"dim {self.dimension})")

    def in_domain(self, elements: tuple) -> bool:
        assignment = dict(zip(self.domain_formula.free_vars, elements))
        return eval_pp_formula(self.domain_formula, assignment)

    def map(self, elements: tuple):
        return self.coordinate_map(tuple(elements))


@dataclass(frozen=True)
class HomotopyWitness:
    """Certificate that a composed self-interpretation is the identity.

    witness_formula is theta(x0, x1, ..., xj): it must hold exactly when
    x0 is the composed coordinate map's output on (x1, ..., xj).
    """

    composed: Interpretation
    witness_formula: PPFormula

    def __post_init__(self):
        if self.composed.source != self.composed.target:
            raise CalculusError("composed interpretation is not self-to-self")
        if self.witness_formula.structure != self.composed.source:
            raise CalculusError("witness formula over wrong structure")
        if self.witness_formula.arity != self.composed.dimension + 1:
            raise CalculusError("witness arity must be dimension + 1")


class CompositionError(CalculusError):
    pass


# ---------------------------------------------------------------------------
# composition


def _fresh_namer(taken):
    taken = set(taken)
    counter = itertools.count()

    def fresh(base="_e"):
        while True:
            cand = f"{base}{next(counter)}"
            if cand not in taken:
                taken.add(cand)
                return cand

    return fresh


def _substitute(formula: PPFormula, rename: dict, fresh) -> tuple:
    """Atoms of `formula` with free vars renamed and exist vars freshened."""
    full = dict(rename)
    for v in formula.exist_vars:
        full[v] = fresh()
    atoms = []
    for a in formula.atoms:
        if isinstance(a, OrderAtom):
            lhs = full.get(a.lhs, a.lhs)
            rhs = full.get(a.rhs, a.rhs)
            atoms.append(OrderAtom(lhs, a.op, rhs))
        else:
            atoms.append(RelAtom(a.code, tuple(full[v] for v in a.args)))
    return tuple(atoms), tuple(full[v] for v in formula.exist_vars)


def compose(J: Interpretation, Is: tuple,
            identity_witness: Optional[PPFormula] = None,
            name: Optional[str] = None) -> Interpretation:
    """The interpretation J o (I_1, ..., I_j).

    Each I_i must interpret J's source structure in one common base
    structure, and all must share a dimension (only dimension 1 is
    implemented; every catalog entry is unary on the inner layer).

    J's formulas are rewritten by atom substitution.  An atom comparing
    coordinate s of one target argument with coordinate s of another is
    replaced by I_s's formula for that atom's relation.  Atoms that
    compare different coordinates have no such direct image; codes
    needing them are left out of the composed formula table, and the
    domain's cross-coordinate part is expressed through the identity
    witness (as the formula "exists x0 . theta") when one is supplied.
    """
    Is = tuple(Is)
    if len(Is) != J.dimension:
        raise CompositionError(
            f"{J.name} expects {J.dimension} inner interpretations, got {len(Is)}")
    base = Is[0].source
    for I in Is:
        if I.target != J.source:
            raise CompositionError(
                f"{I.name} targets {I.target}, but {J.name} reads {J.source}")
        if I.source != base:
            raise CompositionError("inner interpretations disagree on the base")
        if I.dimension != Is[0].dimension:
            raise CompositionError("inner interpretations disagree on dimension")
    inner = Is[0].dimension
    j = J.dimension
    dimension = j * inner
    if inner != 1:
        raise CompositionError("only unary inner interpretations are supported")

    def blocks(formula: PPFormula, nargs: int):
        # J-formula free vars come in nargs blocks of j coordinates
        out = {}
        for pos, v in enumerate(formula.free_vars):
            out[v] = (pos // j, pos % j)
        return out

    xnames = [f"X{s + 1}" for s in range(j)]
    ynames = [f"Y{s + 1}" for s in range(j)]

    def rewrite(formula: PPFormula, nargs: int):
        """Compose one J-formula; None when a cross-coordinate atom blocks it."""
        if formula.exist_vars:
            return None
        coord = blocks(formula, nargs)
        argnames = (xnames, ynames)
        fresh = _fresh_namer(xnames + ynames)
        atoms = []
        exist = []
        for a in formula.atoms:
            if isinstance(a, OrderAtom):
                if not isinstance(a.lhs, str) or not isinstance(a.rhs, str):
                    return None
                key, args = a.op, (a.lhs, a.rhs)
            elif len(a.args) == 2:
                key, args = a.code, a.args
            else:
                return None
            (arg_l, s_l), (arg_r, s_r) = coord[args[0]], coord[args[1]]
            if s_l != s_r:
                return None
            sub = Is[s_l].relation_formulas.get(key)
            if sub is None:
                return None
            pair = (argnames[arg_l][s_l], argnames[arg_r][s_r])
            new_atoms, new_exist = _substitute(
                sub, dict(zip(sub.free_vars, pair)), fresh)
            atoms.extend(new_atoms)
            exist.extend(new_exist)
        return atoms, exist

    fresh = _fresh_namer(xnames + ynames)
    dom_atoms = []
    dom_exist = []
    for s, I in enumerate(Is):
        sub_atoms, sub_exist = _substitute(
            I.domain_formula, {I.domain_formula.free_vars[0]: xnames[s]}, fresh)
        dom_atoms.extend(sub_atoms)
        dom_exist.extend(sub_exist)
    eps = J.domain_formula
    if eps.atoms:
        rewritten = rewrite(eps, 1) if not identity_witness else None
        if identity_witness is not None:
            w = identity_witness
            rename = dict(zip(w.free_vars[1:], xnames))
            rename[w.free_vars[0]] = fresh("_z")
            extra_atoms, extra_exist = _substitute(
                PPFormula(w.structure, w.free_vars, w.exist_vars, w.atoms),
                rename, fresh)
            dom_atoms.extend(extra_atoms)
            dom_exist.append(rename[w.free_vars[0]])
            dom_exist.extend(extra_exist)
        elif rewritten is not None:
            dom_atoms.extend(rewritten[0])
            dom_exist.extend(rewritten[1])
        else:
            raise CompositionError(
                f"domain of {J.name} is not coordinatewise; "
                "pass identity_witness to express it")
    domain_formula = PPFormula(base, tuple(xnames), tuple(dom_exist),
                               tuple(dom_atoms))

    rel_formulas = {}
    skipped = []
    for code, f in J.relation_formulas.items():
        if code == "forw":
            continue
        result = rewrite(f, 2)
        if result is None:
            skipped.append(code)
            continue
        atoms, exist = result
        rel_formulas[code] = PPFormula(base, tuple(xnames + ynames),
                                       tuple(exist), tuple(atoms))

    inner_maps = tuple(I.coordinate_map for I in Is)
    j_in_domain = J.in_domain
    j_map = J.coordinate_map

    def composed_map(elements: tuple):
        values = []
        for s in range(j):
            v = inner_maps[s]((elements[s],))
            if v is None:
                return None
            values.append(v)
        values = tuple(values)
        if not j_in_domain(values):
            return None
        return j_map(values)

    note = ""
    if skipped:
        note = ("codes without a coordinatewise image: "
                + ", ".join(map(str, sorted(skipped, key=str))))
    return Interpretation(
        name=name or f"{J.name} o ({', '.join(I.name for I in Is)})",
        source=base,
        target=J.target,
        dimension=dimension,
        domain_formula=domain_formula,
        relation_formulas=MappingProxyType(rel_formulas),
        coordinate_map=composed_map,
        derived_codes=frozenset(rel_formulas),
        note=note,
    )


def identity_interpretation(structure: str) -> Interpretation:
    if structure == POINT:
        rels = {
            "<": PPFormula(POINT, ("X", "Y"), (), (OrderAtom("X", "<", "Y"),)),
            "=": PPFormula(POINT, ("X", "Y"), (), (OrderAtom("X", "=", "Y"),)),
        }
        domain = PPFormula(POINT, ("X",), (), ())
    else:
        calc = calculus_by_name(structure)
        rels = {code: PPFormula(structure, ("X", "Y"), (),
                                (RelAtom(code, ("X", "Y")),))
                for code in calc.codes()}
        rels["="] = PPFormula(structure, ("X", "Y"), (),
                              (RelAtom("=", ("X", "Y")),))
        domain = PPFormula(structure, ("X",), (), ())
    return Interpretation(
        name=f"identity.{structure.lower()}",
        source=structure,
        target=structure,
        dimension=1,
        domain_formula=domain,
        relation_formulas=MappingProxyType(rels),
        coordinate_map=lambda els: els[0],
    )


# ---------------------------------------------------------------------------
# the catalog


def _point_formula(free, atom_triples, exist=()):
    atoms = tuple(OrderAtom(a, op, b) for a, op, b in atom_triples)
    return PPFormula(POINT, tuple(free), tuple(exist), atoms)


def _ia_j_formulas():
    # one conjunction per basic code, on coordinates u1,u2 / v1,v2
    rename = {"X-": "u1", "X+": "u2", "Y-": "v1", "Y+": "v2"}
    out = {}
    for code in IA_CODES:
        (conj,) = IA.definition(code)
        atoms = tuple(OrderAtom(rename[a.lhs], a.op, rename[a.rhs])
                      for a in conj)
        out[code] = PPFormula(POINT, ("u1", "u2", "v1", "v2"), (), atoms)
    out["="] = _point_formula(("u1", "u2", "v1", "v2"),
                              [("u1", "=", "v1"), ("u2", "=", "v2")])
    return out


def _ra_j_formulas():
    free = ("u1", "u2", "u3", "u4", "v1", "v2", "v3", "v4")
    rename = {"X1-": "u1", "X1+": "u2", "X2-": "u3", "X2+": "u4",
              "Y1-": "v1", "Y1+": "v2", "Y2-": "v3", "Y2+": "v4"}

    def conv(conj):
        return tuple(OrderAtom(rename[a.lhs], a.op, rename[a.rhs]) for a in conj)

    out = {}
    for code in RA.iter_codes():
        (conj,) = RA.definition(code)
        out[code] = PPFormula(POINT, free, (), conv(conj))
    from .relations import _ia_definition

    for axis, slot in ((0, ("u1", "u2", "v1", "v2")),
                       (1, ("u3", "u4", "v3", "v4"))):
        for c in ("s", "f"):
            (conj,) = _ia_definition(c, "A", "B")
            local = {"A-": slot[0], "A+": slot[1], "B-": slot[2], "B+": slot[3]}
            atoms = tuple(OrderAtom(local[a.lhs], a.op, local[a.rhs])
                          for a in conj)
            code = (c, "*") if axis == 0 else ("*", c)
            out[code] = PPFormula(POINT, free, (), atoms)
    out["="] = _point_formula(free, [(f"u{i}", "=", f"v{i}") for i in (1, 2, 3, 4)])
    return out


def _cdc_j_formulas():
    out = {}
    for code, (cx, cy) in CDC_AXES.items():
        atoms = []
        for u, v, cmp_ in (("u1", "v1", cx), ("u2", "v2", cy)):
            if cmp_ == "=":
                atoms.append((u, "=", v))
            elif cmp_ == ">":
                atoms.append((v, "<", u))
            else:
                atoms.append((u, "<", v))
        out[code] = _point_formula(("u1", "u2", "v1", "v2"), atoms)
    out["="] = _point_formula(("u1", "u2", "v1", "v2"),
                              [("u1", "=", "v1"), ("u2", "=", "v2")])
    return out


def _dia_j_formulas():
    free = ("u1", "u2", "v1", "v2")
    return {
        "cb=": _point_formula(free, [("u1", "=", "v1"), ("u2", "<", "v2")]),
        # first argument is the inner (shorter) interval, as in cb=
        "cf=": _point_formula(free, [("v1", "<", "u1"), ("u2", "=", "v2")]),
        "e=": _point_formula(free, [("u2", "<", "v1")]),
        "eq=": _point_formula(free, [("u1", "=", "v1"), ("u2", "=", "v2")]),
        "Eq!=": _point_formula(free, [("u1", "=", "v2"), ("u2", "=", "v1")]),
        "forw": _point_formula(("u1", "u2"), [("u1", "<", "u2")]),
        "=": _point_formula(free, [("u1", "=", "v1"), ("u2", "=", "v2")]),
    }


def _interval_map(values):
    u1, u2 = values
    return Interval(u1, u2) if u1 < u2 else None


def _block_map(values):
    u1, u2, u3, u4 = values
    if u1 < u2 and u3 < u4:
        return Block((Interval(u1, u2), Interval(u3, u4)))
    return None


def _plane_map(values):
    return PlanePoint(values[0], values[1])


def _directed_map(values):
    u1, u2 = values
    if u1 == u2:
        warnings.warn("start equals end: no directed interval exists there",
                      stacklevel=2)
        return None
    return DirectedInterval(u1, u2)


def _ra_proj(axis: int, end: int):
    def proj(els):
        iv = els[0].axes[axis]
        return iv.lo if end == 0 else iv.hi

    return proj


def _build_catalog() -> dict:
    cat = {}

    # --- interval algebra ------------------------------------------------
    ia_eq_note = ("equality formula uses a shared-start witness; the bare "
                  "X(s)Y shape never holds of identical intervals")
    cat["ia.I1"] = Interpretation(
        name="ia.I1", source="IA", target=POINT, dimension=1,
        domain_formula=PPFormula("IA", ("X",), (), ()),
        relation_formulas=MappingProxyType({
            "<": PPFormula("IA", ("X", "Y"), ("Y'", "W"), (
                RelAtom("s", ("Y", "Y'")),
                RelAtom("s", ("X", "W")),
                RelAtom("f", ("Y'", "W")),
            )),
            "=": PPFormula("IA", ("X", "Y"), ("Z",), (
                RelAtom("s", ("Z", "X")),
                RelAtom("s", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].lo,
        derived_codes=frozenset({"="}),
        note=ia_eq_note,
    )
    cat["ia.I2"] = Interpretation(
        name="ia.I2", source="IA", target=POINT, dimension=1,
        domain_formula=PPFormula("IA", ("X",), (), ()),
        relation_formulas=MappingProxyType({
            "<": PPFormula("IA", ("X", "Y"), ("X'", "W"), (
                RelAtom("f", ("X", "X'")),
                RelAtom("f", ("Y", "W")),
                RelAtom("s", ("X'", "W")),
            )),
            "=": PPFormula("IA", ("X", "Y"), ("Z",), (
                RelAtom("f", ("Z", "X")),
                RelAtom("f", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].hi,
        derived_codes=frozenset({"="}),
        note=ia_eq_note.replace("shared-start", "shared-finish"),
    )
    ia_j = _ia_j_formulas()
    cat["ia.J"] = Interpretation(
        name="ia.J", source=POINT, target="IA", dimension=2,
        domain_formula=_point_formula(("u1", "u2"), [("u1", "<", "u2")]),
        relation_formulas=MappingProxyType(ia_j),
        coordinate_map=_interval_map,
        derived_codes=frozenset(ia_j) - {"s", "f", "="},
        note=("the f formula reads v1 < u1: the first argument is the "
              "finishing, inner interval"),
    )

    # --- rectangle algebra -----------------------------------------------
    ra_eq = {
        1: ("s", "*"), 2: ("f", "*"), 3: ("*", "s"), 4: ("*", "f"),
    }
    for idx in (1, 2, 3, 4):
        code = ra_eq[idx]
        axis, end = (idx - 1) // 2, (idx - 1) % 2
        cat[f"ra.I{idx}"] = Interpretation(
            name=f"ra.I{idx}", source="RA", target=POINT, dimension=1,
            domain_formula=PPFormula("RA", ("X",), (), ()),
            relation_formulas=MappingProxyType({
                "<": PPFormula("RA", ("X", "Y"), ("Y'", "W"), (
                    RelAtom(code, ("Y", "Y'")),
                    RelAtom(code, ("X", "W")),
                    RelAtom((("f", "*") if axis == 0 else ("*", "f"))
                            if end == 0 else
                            (("s", "*") if axis == 0 else ("*", "s")),
                            ("Y'", "W")),
                )) if end == 0 else PPFormula("RA", ("X", "Y"), ("X'", "W"), (
                    RelAtom(code, ("X", "X'")),
                    RelAtom(code, ("Y", "W")),
                    RelAtom(("s", "*") if axis == 0 else ("*", "s"),
                            ("X'", "W")),
                )),
                "=": PPFormula("RA", ("X", "Y"), ("Z",), (
                    RelAtom(code, ("Z", "X")),
                    RelAtom(code, ("Z", "Y")),
                )),
            }),
            coordinate_map=_ra_proj(axis, end),
            derived_codes=frozenset({"="}),
            note="axis projection; equality via a shared-endpoint witness",
        )
    ra_j = _ra_j_formulas()
    cat["ra.J"] = Interpretation(
        name="ra.J", source=POINT, target="RA", dimension=4,
        domain_formula=_point_formula(("u1", "u2", "u3", "u4"),
                                      [("u1", "<", "u2"), ("u3", "<", "u4")]),
        relation_formulas=MappingProxyType(ra_j),
        coordinate_map=_block_map,
        derived_codes=frozenset(k for k in ra_j
                                if k not in {("s", "*"), ("f", "*"),
                                             ("*", "s"), ("*", "f"), "="}),
        note="per-axis endpoint conjunctions for all 169 basic pairs",
    )

    # --- cardinal directions ----------------------------------------------
    cat["cdc.I1"] = Interpretation(
        name="cdc.I1", source="CDC", target=POINT, dimension=1,
        domain_formula=PPFormula("CDC", ("X",), (), ()),
        relation_formulas=MappingProxyType({
            "<": PPFormula("CDC", ("X", "Y"), ("X'", "Y'"), (
                RelAtom("N", ("X'", "X")),
                RelAtom("N", ("Y'", "Y")),
                RelAtom("W", ("X'", "Y'")),
            )),
            "=": PPFormula("CDC", ("X", "Y"), ("Z",), (
                RelAtom("N", ("Z", "X")),
                RelAtom("N", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].x,
    )
    cat["cdc.I2"] = Interpretation(
        name="cdc.I2", source="CDC", target=POINT, dimension=1,
        domain_formula=PPFormula("CDC", ("X",), (), ()),
        relation_formulas=MappingProxyType({
            "<": PPFormula("CDC", ("X", "Y"), ("X'", "Y'"), (
                RelAtom("E", ("X'", "X")),
                RelAtom("E", ("Y'", "Y")),
                RelAtom("S", ("X'", "Y'")),
            )),
            "=": PPFormula("CDC", ("X", "Y"), ("Z",), (
                RelAtom("E", ("Z", "X")),
                RelAtom("E", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].y,
    )
    cat["cdc.J"] = Interpretation(
        name="cdc.J", source=POINT, target="CDC", dimension=2,
        domain_formula=_point_formula(("u1", "u2"), []),
        relation_formulas=MappingProxyType(_cdc_j_formulas()),
        coordinate_map=_plane_map,
    )

    # --- directed intervals -----------------------------------------------
    forw_dom = PPFormula("DIA", ("X",), (), (RelAtom("forw", ("X",)),))
    cat["dia.I1"] = Interpretation(
        name="dia.I1", source="DIA", target=POINT, dimension=1,
        domain_formula=forw_dom,
        relation_formulas=MappingProxyType({
            "<": PPFormula("DIA", ("X", "Y"), ("Y'", "W"), (
                RelAtom("cb=", ("Y", "Y'")),
                RelAtom("cb=", ("X", "W")),
                RelAtom("cf=", ("Y'", "W")),
            )),
            "=": PPFormula("DIA", ("X", "Y"), ("Z",), (
                RelAtom("cb=", ("Z", "X")),
                RelAtom("cb=", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].start if els[0].forward else None,
        derived_codes=frozenset({"="}),
        note="domain is the forward fragment; equality via a shared-start witness",
    )
    cat["dia.I2"] = Interpretation(
        name="dia.I2", source="DIA", target=POINT, dimension=1,
        domain_formula=forw_dom,
        relation_formulas=MappingProxyType({
            "<": PPFormula("DIA", ("X", "Y"), ("X'", "W"), (
                RelAtom("cf=", ("X", "X'")),
                RelAtom("cf=", ("Y", "W")),
                RelAtom("cb=", ("X'", "W")),
            )),
            "=": PPFormula("DIA", ("X", "Y"), ("Z",), (
                RelAtom("cf=", ("Z", "X")),
                RelAtom("cf=", ("Z", "Y")),
            )),
        }),
        coordinate_map=lambda els: els[0].end if els[0].forward else None,
        derived_codes=frozenset({"="}),
        note="domain is the forward fragment; equality via a shared-finish witness",
    )
    dia_j = _dia_j_formulas()
    cat["dia.J"] = Interpretation(
        name="dia.J", source=POINT, target="DIA", dimension=2,
        domain_formula=_point_formula(("u1", "u2"), [("u1", "<=", "u2")]),
        relation_formulas=MappingProxyType(dia_j),
        coordinate_map=_directed_map,
        derived_codes=frozenset(dia_j) - {"cb=", "cf=", "="},
        note=("covers the forward fragment only; the non-strict domain "
              "admits u1 = u2 where no directed interval exists (the "
              "coordinate map warns and returns nothing there)"),
    )

    # --- standalone defined relations --------------------------------------
    cat["ia.s_from_m"] = PPFormula("IA", ("X", "Y"), ("Z", "U", "V"), (
        RelAtom("m", ("Z", "X")),
        RelAtom("m", ("Z", "Y")),
        RelAtom("m", ("X", "U")),
        RelAtom("m", ("U", "V")),
        RelAtom("m", ("Y", "V")),
    ))
    cat["ia.f_from_m"] = PPFormula("IA", ("X", "Y"), ("Z", "U", "V"), (
        RelAtom("m", ("X", "Z")),
        RelAtom("m", ("Y", "Z")),
        RelAtom("m", ("U", "X")),
        RelAtom("m", ("V", "U")),
        RelAtom("m", ("V", "Y")),
    ))
    cat["ra.s_top"] = PPFormula("RA", ("X", "Y"), ("Z",), (
        RelAtom(("s", "p"), ("X", "Z")),
        RelAtom(("s", "p~"), ("Z", "Y")),
    ))
    cat["cdc.ne_from_n_e"] = PPFormula("CDC", ("X", "Y"), ("Y'",), (
        RelAtom("E", ("Y'", "Y")),
        RelAtom("N", ("X", "Y'")),
    ))

    # --- homotopy witnesses -------------------------------------------------
    thetas = {
        "ia": PPFormula("IA", ("Z", "X", "Y"), (), (
            RelAtom("s", ("X", "Z")),
            RelAtom("f", ("Y", "Z")),
        )),
        "ra": PPFormula("RA", ("Z", "W1", "W2", "W3", "W4"), (), (
            RelAtom(("s", "*"), ("W1", "Z")),
            RelAtom(("f", "*"), ("W2", "Z")),
            RelAtom(("*", "s"), ("W3", "Z")),
            RelAtom(("*", "f"), ("W4", "Z")),
        )),
        "cdc": PPFormula("CDC", ("Z", "U", "V"), ("U'", "V'"), (
            RelAtom("N", ("U'", "U")),
            RelAtom("N", ("U'", "Z")),
            RelAtom("E", ("V'", "V")),
            RelAtom("E", ("V'", "Z")),
        )),
        "dia": PPFormula("DIA", ("Z", "X", "Y"), (), (
            RelAtom("cb=", ("X", "Z")),
            RelAtom("cf=", ("Y", "Z")),
        )),
    }
    inner = {
        "ia": ("ia.I1", "ia.I2"),
        "ra": ("ra.I1", "ra.I2", "ra.I3", "ra.I4"),
        "cdc": ("cdc.I1", "cdc.I2"),
        "dia": ("dia.I1", "dia.I2"),
    }
    for key, names in inner.items():
        composed = compose(cat[f"{key}.J"], tuple(cat[n] for n in names),
                           identity_witness=thetas[key],
                           name=f"{key}.J o I*")
        cat[f"{key}.homotopy"] = HomotopyWitness(composed, thetas[key])

    return cat


_CATALOG: Optional[dict] = None


def catalog() -> MappingProxyType:
    """Named interpretations, defined relations, and homotopy witnesses."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return MappingProxyType(_CATALOG)


# ---------------------------------------------------------------------------
# homotopy checking


@dataclass(frozen=True)
class HomotopyCheck:
    """Outcome of check_homotopy_identity; truthy iff no counterexample."""

    checked: int
    skipped: tuple
    counterexample: Optional[tuple] = None

    def __bool__(self):
        return self.counterexample is None


def _theta_components(w: HomotopyWitness):
    theta = w.witness_formula
    z_var = theta.free_vars[0]
    arg_vars = theta.free_vars[1:]
    # same formula with the target slot demoted to an existential
    exists_z = PPFormula(theta.structure, arg_vars,
                         (z_var,) + theta.exist_vars, theta.atoms)
    return theta, exists_z, z_var, arg_vars


def check_homotopy_identity(w: HomotopyWitness, samples) -> HomotopyCheck:
    """Verify that the witness formula pins the composed map's output.

    For each sample tuple in the composed domain (elsewhere: skipped with
    a notice), theta must hold at z* = composed coordinate map(sample),
    and at no other element: every slot of the witnessed variable is
    pinned by showing that forcing it above or below its value makes
    theta unsatisfiable.
    """
    theta, exists_z, z_var, arg_vars = _theta_components(w)
    calc = calculus_by_name(w.composed.source)
    z_slots = calc.slots_for(z_var)
    checked = 0
    skipped = []
    for sample in samples:
        sample = tuple(sample)
        base = dict(zip(arg_vars, sample))
        if not w.composed.in_domain(sample):
            skipped.append((sample, "outside the composed domain"))
            continue
        z_star = w.composed.coordinate_map(sample)
        if z_star is None:
            return HomotopyCheck(checked, tuple(skipped),
                                 (sample, "witness satisfiable but map undefined",
                                  None))
        full = dict(base)
        full[z_var] = z_star
        if not eval_pp_formula(theta, full):
            return HomotopyCheck(checked, tuple(skipped),
                                 (sample, "witness fails at the mapped output",
                                  z_star))
        for slot, value in zip(z_slots, z_star.endpoints()):
            for probe in (OrderAtom(slot, "<", _q(value)),
                          OrderAtom(_q(value), "<", slot)):
                if eval_pp_formula(exists_z, base, extra=(probe,)):
                    return HomotopyCheck(
                        checked, tuple(skipped),
                        (sample, f"{slot} is not pinned to {value}", z_star))
        checked += 1
    return HomotopyCheck(checked, tuple(skipped))


# ---------------------------------------------------------------------------
# instance translation


def translate_instance(inst, I: Interpretation):
    """Rewrite an instance through an interpretation.

    A qualitative instance goes through a point-side interpretation
    (e.g. ia.J): every variable becomes its endpoint slots, element
    validity becomes slot atoms, single-basic single-disjunct
    constraints become plain atoms, and everything else becomes a
    grouped disjunctive constraint whose models are the constraint's
    endpoint weak orders.

    A conjunctive point instance goes the other way through an element
    interpretation (e.g. ia.I1): each atom is replaced by that atom's
    defining formula, with fresh element variables for its existentials.
    """
    if isinstance(inst, QualInstance):
        return _translate_qual(inst, I)
    if isinstance(inst, PointInstance):
        return _translate_point(inst, I)
    raise CalculusError(f"cannot translate {type(inst).__name__}")


def _translate_qual(inst: QualInstance, I: Interpretation) -> PointInstance:
    calc = inst.calculus
    if I.source != POINT or I.target != calc.name:
        raise CalculusError(
            f"{I.name} does not interpret {calc.name} in the point structure")
    if I.dimension != len(calc.slot_suffixes):
        raise CalculusError(
            f"{I.name} has dimension {I.dimension}, "
            f"but {calc.name} elements have {len(calc.slot_suffixes)} slots")
    variables = []
    atoms = []
    for v in inst.variables:
        variables.extend(calc.slots_for(v))
        atoms.extend(calc.domain_atoms(v))
    for v in inst.forw_vars:
        atoms.extend(calc.unary_definition("forw", v)[0])
    grouped = []
    for x, rel, y in inst.constraints:
        for code in rel.codes():
            if code not in I.relation_formulas:
                raise CalculusError(
                    f"{I.name} has no relation formula for {code!r}")
        codes = rel.codes()
        if len(codes) == 1:
            dnf = calc.definition(codes[0], x, y)
            if len(dnf) == 1:
                atoms.extend(dnf[0])
                continue
        scope = calc.slots_for(x) + calc.slots_for(y)
        grouped.append((scope, relation_of(rel)))
    return PointInstance(variables=tuple(variables), atoms=tuple(atoms),
                         grouped=tuple(grouped))


def _translate_point(inst: PointInstance, I: Interpretation) -> QualInstance:
    if I.target != POINT or I.source == POINT or I.dimension != 1:
        raise CalculusError(
            f"{I.name} does not interpret the point structure in a calculus")
    calc = calculus_by_name(I.source)
    if inst.constants:
        raise CalculusError("constants have no relation formula")
    if inst.grouped:
        raise CalculusError(
            "disjunctive point constraints have no conjunctive image")
    variables = list(inst.variables)
    fresh = _fresh_namer(variables)
    constraints = []
    forw = []

    def add_formula(formula: PPFormula, binding: dict):
        atoms, exist = _substitute(formula, binding, fresh)
        for v in exist:
            variables.append(v)
        for a in atoms:
            if len(a.args) == 1:
                if a.code != "forw":
                    raise CalculusError(f"unexpected unary code {a.code!r}")
                forw.append(a.args[0])
            else:
                constraints.append(
                    (a.args[0], relation(calc, [a.code]), a.args[1]))

    for atom in inst.atoms:
        lhs, op, rhs = atom.lhs, atom.op, atom.rhs
        if not isinstance(lhs, str) or not isinstance(rhs, str):
            raise CalculusError("constants have no relation formula")
        if op == "<=" or op == "!=":
            raise CalculusError(f"{I.name} has no relation formula for {op!r}")
        formula = I.relation_formulas.get(op)
        if formula is None:
            raise CalculusError(f"{I.name} has no relation formula for {op!r}")
        add_formula(formula, dict(zip(formula.free_vars, (lhs, rhs))))

    if I.domain_formula.atoms:
        for v in list(variables):
            add_formula(I.domain_formula,
                        {I.domain_formula.free_vars[0]: v})

    seen = set()
    forw_vars = tuple(v for v in forw if not (v in seen or seen.add(v)))
    return QualInstance(calculus=calc, variables=tuple(variables),
                        constraints=tuple(constraints), forw_vars=forw_vars)


# ---------------------------------------------------------------------------
# forw elimination


def eliminate_forw(inst: QualInstance) -> QualInstance:
    """Replace forw constraints by a same-direction chain.

    forw(X_1), ..., forw(X_m) become X_1(same)X_2, ..., X_{m-1}(same)X_m
    where same(U, V) = exists U',V' (U e= U' & V e= V' & U' eq= V').
    The chain only forces one shared direction; that is enough, because
    reversing every interval at once maps solutions to solutions while
    preserving all five relation codes.
    """
    if inst.calculus is not DIA:
        raise CalculusError("forw elimination applies to directed intervals")
    if len(inst.forw_vars) <= 1:
        return QualInstance(inst.calculus, inst.variables, inst.constraints,
                            forw_vars=())
    variables = list(inst.variables)
    fresh = _fresh_namer(variables)
    constraints = list(inst.constraints)
    e_rel = relation(DIA, ["e="])
    eq_rel = relation(DIA, ["eq="])
    chain = inst.forw_vars
    for u, v in zip(chain, chain[1:]):
        up, vp = fresh("_d"), fresh("_d")
        variables.extend((up, vp))
        constraints.append((u, e_rel, up))
        constraints.append((v, e_rel, vp))
        constraints.append((up, eq_rel, vp))
    return QualInstance(DIA, tuple(variables), tuple(constraints),
                        forw_vars=())
