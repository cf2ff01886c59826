"""Existential-conjunctive formulas over a calculus or the rational order.

A PPFormula is a conjunction of relation atoms under a block of
existential quantifiers: no disjunction, negation, or universal
quantification.  Formulas over "POINT" use order atoms directly;
formulas over a calculus use named basic relations (plus "=" and unary
codes) between element variables.

eval_pp_formula decides truth under an assignment of the free variables
by compiling every relation atom down to endpoint order atoms and
asking the conjunctive store, one disjunct choice at a time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .points import conjunction_satisfiable
from .relations import (
    CalculusError,
    Conjunction,
    Dnf,
    OrderAtom,
    _ia_definition,
    _q,
    calculus_by_name,
)

POINT = "POINT"

_ORDER_OPS = {"<", "<=", "=", "!="}


class RelAtom(NamedTuple):
    """One relation atom: a basic code (or "=", or a unary code) on variables."""

    code: object
    args: tuple


def _is_star_code(calc, code) -> bool:
    # BA code with "*" wildcards: the starred axes are unconstrained
    if not isinstance(code, tuple) or not hasattr(calc, "p"):
        return False
    if len(code) != calc.p or "*" not in code:
        return False
    from .relations import IA_CODES

    return all(c == "*" or c in IA_CODES for c in code)


@dataclass(frozen=True)
class PPFormula:
    """Purely existential-conjunctive formula over a named structure."""

    structure: str
    free_vars: tuple
    exist_vars: tuple = ()
    atoms: tuple = ()

    def __post_init__(self):
        declared = set(self.free_vars) | set(self.exist_vars)
        if len(declared) != len(self.free_vars) + len(self.exist_vars):
            raise ValueError("free and existential variables must be distinct")
        if self.structure == POINT:
            for a in self.atoms:
                if not isinstance(a, OrderAtom) or a.op not in _ORDER_OPS:
                    raise ValueError(f"bad point atom {a!r}")
                for side in (a.lhs, a.rhs):
                    if isinstance(side, str) and side not in declared:
                        raise ValueError(f"atom on undeclared variable {side}")
        else:
            calc = calculus_by_name(self.structure)
            for a in self.atoms:
                if not isinstance(a, RelAtom):
                    raise ValueError(f"bad relation atom {a!r}")
                for v in a.args:
                    if v not in declared:
                        raise ValueError(f"atom on undeclared variable {v}")
                if len(a.args) == 1:
                    if not hasattr(calc, "unary_definition"):
                        raise ValueError(f"{calc.name} has no unary codes")
                elif len(a.args) == 2:
                    if a.code != "=" and not calc.is_code(a.code) \
                            and not _is_star_code(calc, a.code):
                        raise ValueError(f"unknown code {a.code!r}")
                else:
                    raise ValueError("relation atoms are unary or binary")

    @property
    def arity(self) -> int:
        return len(self.free_vars)

    def __str__(self):
        parts = []
        for a in self.atoms:
            if isinstance(a, OrderAtom):
                parts.append(f"{a.lhs} {a.op} {a.rhs}")
            elif len(a.args) == 1:
                parts.append(f"{a.code}({a.args[0]})")
            else:
                code = a.code
                if isinstance(code, tuple):
                    code = "(" + ",".join(code) + ")"
                parts.append(f"{a.args[0]} ({code}) {a.args[1]}")
        body = " & ".join(parts) if parts else "true"
        if self.exist_vars:
            return f"exists {','.join(self.exist_vars)} . {body}"
        return body


def _rel_atom_dnf(calc, atom: RelAtom) -> Dnf:
    """Endpoint-order semantics of one relation atom, as a DNF."""
    code, args = atom
    if len(args) == 1:
        return calc.unary_definition(code, args[0])
    x, y = args
    if code == "=":
        pairs = zip(calc.slots_for(x), calc.slots_for(y))
        return (tuple(OrderAtom(a, "=", b) for a, b in pairs),)
    if _is_star_code(calc, code):
        conj = []
        for i, c in enumerate(code, start=1):
            if c == "*":
                continue
            (axis,) = _ia_definition(c, f"{x}{i}", f"{y}{i}")
            conj.extend(axis)
        return (tuple(conj),)
    return calc.definition(code, x, y)


def eval_pp_formula(formula: PPFormula, assignment: dict,
                    extra: Conjunction = ()) -> bool:
    """Truth of the formula when its free variables take the given values.

    `extra` appends raw endpoint atoms to every disjunct choice; it is a
    hook for probing solution sets (e.g. pinning one coordinate of an
    existential variable), not part of the formula itself.
    """
    missing = [v for v in formula.free_vars if v not in assignment]
    if missing:
        raise ValueError(f"assignment missing {missing}")
    if formula.structure == POINT:
        fixed = {v: _q(assignment[v]) for v in formula.free_vars}
        return conjunction_satisfiable(tuple(formula.atoms) + tuple(extra),
                                       fixed=fixed)

    calc = calculus_by_name(formula.structure)
    fixed = {}
    for v in formula.free_vars:
        element = assignment[v]
        calc.check_element(element)
        for slot, value in zip(calc.slots_for(v), element.endpoints()):
            fixed[slot] = value
    base = list(extra)
    for v in itertools.chain(formula.free_vars, formula.exist_vars):
        base.extend(calc.domain_atoms(v))
    options = [_rel_atom_dnf(calc, a) for a in formula.atoms]
    for choice in itertools.product(*options):
        conj = list(base)
        for part in choice:
            conj.extend(part)
        if conjunction_satisfiable(conj, fixed=fixed):
            return True
    return False
