"""Domain elements and basic relations of the qualitative calculi.

Four families are covered: the interval algebra over closed rational
intervals (IA), its p-dimensional block generalization BA_p (p = 2 is the
rectangle algebra RA), the cardinal direction calculus over rational plane
points (CDC), and a five-relation fragment of the directed interval
algebra (DIA) plus the unary direction predicate forw.

Every basic relation carries an explicit definition: a small disjunction
of conjunctions of order atoms over named endpoint slots.  Classification,
composition, converses, and the translation to the point language are all
derived from these definitions rather than from stored tables.

Arithmetic is exact everywhere; coordinates are Fractions, never floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Optional, Union

Rational = Fraction
Coord = Union[int, Fraction]


class CalculusError(ValueError):
    """Unknown code, calculus mismatch, or an operation a calculus lacks."""


def _q(value) -> Rational:
    if isinstance(value, float):
        raise TypeError("float coordinates are not allowed, use Fraction or int")
    return value if isinstance(value, Fraction) else Fraction(value)


# ---------------------------------------------------------------------------
# domain elements


@dataclass(frozen=True)
class Interval:
    """Closed rational interval [lo, hi] with lo < hi (no point intervals)."""

    lo: Rational
    hi: Rational

    def __post_init__(self):
        object.__setattr__(self, "lo", _q(self.lo))
        object.__setattr__(self, "hi", _q(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")

    def endpoints(self) -> tuple[Rational, ...]:
        return (self.lo, self.hi)

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class Block:
    """Axis-aligned product of p intervals, the BA_p domain element."""

    axes: tuple[Interval, ...]

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValueError("block needs at least one axis")
        for a in axes:
            if not isinstance(a, Interval):
                raise TypeError("block axes must be Interval values")
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    def endpoints(self) -> tuple[Rational, ...]:
        return tuple(v for a in self.axes for v in (a.lo, a.hi))

    def __repr__(self):
        return "(" + ", ".join(repr(a) for a in self.axes) + ")"


def block(*axes) -> Block:
    """Build a Block from (lo, hi) pairs: block((0, 1), (2, 5))."""
    return Block(tuple(Interval(lo, hi) for lo, hi in axes))


@dataclass(frozen=True)
class PlanePoint:
    x: Rational
    y: Rational

    def __post_init__(self):
        object.__setattr__(self, "x", _q(self.x))
        object.__setattr__(self, "y", _q(self.y))

    def endpoints(self) -> tuple[Rational, ...]:
        return (self.x, self.y)

    def __repr__(self):
        return f"({self.x}, {self.y})"


@dataclass(frozen=True)
class DirectedInterval:
    """Oriented rational interval; start != end, forward iff end > start."""

    start: Rational
    end: Rational

    def __post_init__(self):
        object.__setattr__(self, "start", _q(self.start))
        object.__setattr__(self, "end", _q(self.end))
        if self.start == self.end:
            raise ValueError("directed interval needs start != end")

    @property
    def forward(self) -> bool:
        return self.end > self.start

    def reversed(self) -> "DirectedInterval":
        return DirectedInterval(self.end, self.start)

    def endpoints(self) -> tuple[Rational, ...]:
        return (self.start, self.end)

    def __repr__(self):
        return f"<{self.start} -> {self.end}>"


# ---------------------------------------------------------------------------
# order atoms and basic-relation definitions

OPS = ("<", "<=", "=", "!=")


class OrderAtom(NamedTuple):
    """lhs op rhs where each side is a slot name (str) or a Rational."""

    lhs: object
    op: str
    rhs: object

    def __repr__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


# a definition is a disjunction of conjunctions of atoms
Conjunction = tuple[OrderAtom, ...]
Dnf = tuple[Conjunction, ...]


def _atoms(*triples) -> Conjunction:
    return tuple(OrderAtom(a, op, b) for a, op, b in triples)


IA_CODES = ("p", "p~", "m", "m~", "o", "o~", "d", "d~", "s", "s~", "f", "f~", "eq")

_IA_CONVERSE_HALF = {"p": "p~", "m": "m~", "o": "o~", "d": "d~", "s": "s~", "f": "f~"}
IA_CONVERSE = {"eq": "eq"}
IA_CONVERSE.update(_IA_CONVERSE_HALF)
IA_CONVERSE.update({v: k for k, v in _IA_CONVERSE_HALF.items()})


def _ia_definition(code: str, x: str, y: str) -> Dnf:
    xm, xp, ym, yp = x + "-", x + "+", y + "-", y + "+"
    table = {
        "p": ((xp, "<", ym),),
        "p~": ((yp, "<", xm),),
        "m": ((xp, "=", ym),),
        "m~": ((yp, "=", xm),),
        "o": ((xm, "<", ym), (ym, "<", xp), (xp, "<", yp)),
        "o~": ((ym, "<", xm), (xm, "<", yp), (yp, "<", xp)),
        "d": ((ym, "<", xm), (xp, "<", yp)),
        "d~": ((xm, "<", ym), (yp, "<", xp)),
        "s": ((xm, "=", ym), (xp, "<", yp)),
        "s~": ((xm, "=", ym), (yp, "<", xp)),
        "f": ((xp, "=", yp), (ym, "<", xm)),
        "f~": ((xp, "=", yp), (xm, "<", ym)),
        "eq": ((xm, "=", ym), (xp, "=", yp)),
    }
    return (_atoms(*table[code]),)


CDC_CODES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")

# each code as (x comparison, y comparison) of the first point against the second
CDC_AXES = {
    "N": ("=", ">"),
    "NE": (">", ">"),
    "E": (">", "="),
    "SE": (">", "<"),
    "S": ("=", "<"),
    "SW": ("<", "<"),
    "W": ("<", "="),
    "NW": ("<", ">"),
}
CDC_BY_AXES = {v: k for k, v in CDC_AXES.items()}
CDC_CONVERSE = {"N": "S", "S": "N", "E": "W", "W": "E",
                "NE": "SW", "SW": "NE", "SE": "NW", "NW": "SE"}


def _cmp_atom(a: str, op: str, b: str) -> tuple:
    # ">" is sugar for a reversed "<"; atoms only ever store "<"
    if op == ">":
        return (b, "<", a)
    return (a, op, b)


def _cdc_definition(code: str, x: str, y: str) -> Dnf:
    xx, xy, yx, yy = x + "x", x + "y", y + "x", y + "y"
    cx, cy = CDC_AXES[code]
    triples = []
    triples.append(_cmp_atom(xx, cx, yx))
    triples.append(_cmp_atom(xy, cy, yy))
    return (_atoms(*triples),)


# Directed-interval fragment.  Slots: X- is the start, X+ is the end, so a
# forward interval satisfies X- < X+ and a backward one X+ < X-.  Each
# binary code except the two equality relations needs one disjunct per
# shared direction; the direction atoms are part of the disjunct.
DIA_CODES = ("cb=", "cf=", "e=", "eq=", "Eq!=")
DIA_SELF_CONVERSE = {"eq=", "Eq!="}


def _dia_definition(code: str, x: str, y: str) -> Dnf:
    xm, xp, ym, yp = x + "-", x + "+", y + "-", y + "+"
    fwd_x, bwd_x = (xm, "<", xp), (xp, "<", xm)
    fwd_y, bwd_y = (ym, "<", yp), (yp, "<", ym)
    # cb=/cf= compare the occupied extents, not the travel order: reversing
    # every interval in place (the Eq!= automorphism) must fix each code,
    # which is what makes dropping forw literals sound
    if code == "cb=":  # same left extent end, stops short inside
        return (
            _atoms(fwd_x, fwd_y, (xm, "=", ym), (xp, "<", yp)),
            _atoms(bwd_x, bwd_y, (xp, "=", yp), (xm, "<", ym)),
        )
    if code == "cf=":  # same right extent end, starts short inside
        return (
            _atoms(fwd_x, fwd_y, (xp, "=", yp), (ym, "<", xm)),
            _atoms(bwd_x, bwd_y, (xm, "=", ym), (yp, "<", xp)),
        )
    if code == "e=":  # wholly before along the axis, same direction
        return (
            _atoms(fwd_x, fwd_y, (xp, "<", ym)),
            _atoms(bwd_x, bwd_y, (xm, "<", yp)),
        )
    if code == "eq=":  # same point set, same direction
        return (_atoms((xm, "=", ym), (xp, "=", yp)),)
    if code == "Eq!=":  # same point set, opposite directions
        return (_atoms((xm, "=", yp), (xp, "=", ym)),)
    raise CalculusError(f"unknown DIA code {code!r}")


def _dia_forw_definition(x: str) -> Dnf:
    return (_atoms((x + "-", "<", x + "+")),)


# ---------------------------------------------------------------------------
# calculi


def _eval_conjunction(conj: Conjunction, values: dict) -> bool:
    for lhs, op, rhs in conj:
        a = values[lhs] if isinstance(lhs, str) else lhs
        b = values[rhs] if isinstance(rhs, str) else rhs
        ok = (a < b if op == "<" else a <= b if op == "<=" else
              a == b if op == "=" else a != b)
        if not ok:
            return False
    return True


def _eval_dnf(dnf: Dnf, values: dict) -> bool:
    return any(_eval_conjunction(c, values) for c in dnf)


def _classify_ia_values(am, ap, bm, bp) -> str:
    # assumes am < ap and bm < bp
    if ap < bm:
        return "p"
    if bp < am:
        return "p~"
    if ap == bm:
        return "m"
    if bp == am:
        return "m~"
    if am == bm:
        if ap == bp:
            return "eq"
        return "s" if ap < bp else "s~"
    if ap == bp:
        return "f" if bm < am else "f~"
    if am < bm:
        return "d~" if bp < ap else "o"
    return "d" if ap < bp else "o~"


class Calculus:
    """A named family of basic relations over one element type.

    slot_suffixes name the per-variable endpoint slots in declaration
    order; var_groups partitions those slots into comparability groups
    (slots in different groups are never compared by any definition).
    """

    def __init__(self, name: str, slot_suffixes: tuple[str, ...],
                 var_groups: tuple[tuple[int, ...], ...], element_type: type):
        self.name = name
        self.slot_suffixes = slot_suffixes
        self.var_groups = var_groups
        self.element_type = element_type

    def __repr__(self):
        return f"<calculus {self.name}>"

    # -- codes ------------------------------------------------------------

    def codes(self) -> tuple:
        raise NotImplementedError

    def is_code(self, code) -> bool:
        raise NotImplementedError

    def code_count(self) -> int:
        raise NotImplementedError

    def uses_mask(self) -> bool:
        return True

    def code_index(self, code) -> int:
        raise NotImplementedError

    # -- definitions -------------------------------------------------------

    def definition(self, code, x: str = "X", y: str = "Y") -> Dnf:
        raise NotImplementedError

    def converse_code(self, code):
        raise NotImplementedError

    def domain_atoms(self, x: str = "X") -> Conjunction:
        """Atoms every valid element of this calculus satisfies."""
        return ()

    # -- elements ----------------------------------------------------------

    def slots_for(self, var: str) -> tuple[str, ...]:
        return tuple(var + s for s in self.slot_suffixes)

    def check_element(self, a) -> None:
        if not isinstance(a, self.element_type):
            raise CalculusError(
                f"{self.name} element expected, got {type(a).__name__}")
        if isinstance(a, Block) and a.dim != len(self.slot_suffixes) // 2:
            raise CalculusError(
                f"{self.name} needs dimension {len(self.slot_suffixes) // 2}, "
                f"got {a.dim}")

    def make_element(self, values: tuple):
        raise NotImplementedError

    def classify_values(self, avals: tuple, bvals: tuple):
        """Basic code holding between two valid endpoint tuples, or None."""
        raise NotImplementedError


class _IACalculus(Calculus):
    def __init__(self):
        super().__init__("IA", ("-", "+"), ((0, 1),), Interval)

    def codes(self):
        return IA_CODES

    def is_code(self, code):
        return code in IA_CONVERSE

    def code_count(self):
        return 13

    def code_index(self, code):
        return IA_CODES.index(code)

    def definition(self, code, x="X", y="Y"):
        if not self.is_code(code):
            raise CalculusError(f"unknown IA code {code!r}")
        return _ia_definition(code, x, y)

    def converse_code(self, code):
        return IA_CONVERSE[code]

    def domain_atoms(self, x="X"):
        return _atoms((x + "-", "<", x + "+"))

    def make_element(self, values):
        return Interval(values[0], values[1])

    def classify_values(self, avals, bvals):
        return _classify_ia_values(avals[0], avals[1], bvals[0], bvals[1])


class _BACalculus(Calculus):
    def __init__(self, p: int):
        suffixes = tuple(f"{i}{e}" for i in range(1, p + 1) for e in ("-", "+"))
        groups = tuple((2 * i, 2 * i + 1) for i in range(p))
        super().__init__("RA" if p == 2 else f"BA{p}", suffixes, groups, Block)
        self.p = p
        self._codes = tuple(itertools.product(IA_CODES, repeat=p)) if p <= 2 else None
        self._index = {c: i for i, c in enumerate(self._codes)} if self._codes else None

    def codes(self):
        if self._codes is not None:
            return self._codes
        raise CalculusError(
            f"{self.name} has 13^{self.p} basic codes; enumerate with iter_codes()")

    def iter_codes(self) -> Iterator[tuple]:
        return itertools.product(IA_CODES, repeat=self.p)

    def is_code(self, code):
        return (isinstance(code, tuple) and len(code) == self.p
                and all(c in IA_CONVERSE for c in code))

    def code_count(self):
        return 13 ** self.p

    def uses_mask(self):
        return self.p <= 2

    def code_index(self, code):
        return self._index[code]

    def definition(self, code, x="X", y="Y"):
        if not self.is_code(code):
            raise CalculusError(f"unknown {self.name} code {code!r}")
        conj = []
        for i, c in enumerate(code, start=1):
            (axis_conj,) = _ia_definition(c, f"{x}{i}", f"{y}{i}")
            conj.extend(axis_conj)
        return (tuple(conj),)

    def converse_code(self, code):
        return tuple(IA_CONVERSE[c] for c in code)

    def domain_atoms(self, x="X"):
        triples = [(f"{x}{i}-", "<", f"{x}{i}+") for i in range(1, self.p + 1)]
        return _atoms(*triples)

    def make_element(self, values):
        axes = tuple(Interval(values[2 * i], values[2 * i + 1]) for i in range(self.p))
        return Block(axes)

    def classify_values(self, avals, bvals):
        return tuple(
            _classify_ia_values(avals[2 * i], avals[2 * i + 1],
                                bvals[2 * i], bvals[2 * i + 1])
            for i in range(self.p))


class _CDCCalculus(Calculus):
    def __init__(self):
        super().__init__("CDC", ("x", "y"), ((0,), (1,)), PlanePoint)

    def codes(self):
        return CDC_CODES

    def is_code(self, code):
        return code in CDC_AXES

    def code_count(self):
        return 8

    def code_index(self, code):
        return CDC_CODES.index(code)

    def definition(self, code, x="X", y="Y"):
        if not self.is_code(code):
            raise CalculusError(f"unknown CDC code {code!r}")
        return _cdc_definition(code, x, y)

    def converse_code(self, code):
        return CDC_CONVERSE[code]

    def make_element(self, values):
        return PlanePoint(values[0], values[1])

    def classify_values(self, avals, bvals):
        cx = "=" if avals[0] == bvals[0] else ("<" if avals[0] < bvals[0] else ">")
        cy = "=" if avals[1] == bvals[1] else ("<" if avals[1] < bvals[1] else ">")
        return CDC_BY_AXES.get((cx, cy))  # None when the points coincide


class _DIACalculus(Calculus):
    def __init__(self):
        super().__init__("DIA", ("-", "+"), ((0, 1),), DirectedInterval)

    def codes(self):
        return DIA_CODES

    def is_code(self, code):
        return code in DIA_CODES

    def code_count(self):
        return 5

    def code_index(self, code):
        return DIA_CODES.index(code)

    def definition(self, code, x="X", y="Y"):
        return _dia_definition(code, x, y)

    def converse_code(self, code):
        if code in DIA_SELF_CONVERSE:
            return code
        # the fragment does not contain the converses of cb=, cf=, e=
        raise CalculusError(f"DIA fragment has no converse for {code!r}")

    def domain_atoms(self, x="X"):
        return _atoms((x + "-", "!=", x + "+"))

    def unary_definition(self, code: str, x: str = "X") -> Dnf:
        if code != "forw":
            raise CalculusError(f"unknown DIA unary code {code!r}")
        return _dia_forw_definition(x)

    def make_element(self, values):
        return DirectedInterval(values[0], values[1])

    def classify_values(self, avals, bvals):
        values = {"X-": avals[0], "X+": avals[1], "Y-": bvals[0], "Y+": bvals[1]}
        for code in DIA_CODES:
            if _eval_dnf(_dia_definition(code, "X", "Y"), values):
                return code
        return None  # the fragment is not exhaustive


IA = _IACalculus()
CDC = _CDCCalculus()
DIA = _DIACalculus()

_BA_CACHE: dict[int, _BACalculus] = {}


def BA(p: int) -> _BACalculus:
    if p < 1:
        raise ValueError("block dimension must be positive")
    if p not in _BA_CACHE:
        _BA_CACHE[p] = _BACalculus(p)
    return _BA_CACHE[p]


RA = BA(2)

_BY_NAME = {"IA": IA, "CDC": CDC, "DIA": DIA}


def calculus_by_name(name: str) -> Calculus:
    if name in _BY_NAME:
        return _BY_NAME[name]
    if name == "RA":
        return RA
    if name.startswith("BA") and name[2:].isdigit():
        return BA(int(name[2:]))
    raise CalculusError(f"unknown calculus {name!r}")


# ---------------------------------------------------------------------------
# relations: disjunctive sets of basic codes


@dataclass(frozen=True)
class QualitativeRelation:
    """Set of basic codes of one calculus; empty means unsatisfiable.

    Mask-backed (one bit per code) for calculi with a small listable
    codespace; BA_p with p > 2 falls back to an explicit frozenset.
    """

    calculus: Calculus
    mask: Optional[int] = None
    items: Optional[frozenset] = None

    def __post_init__(self):
        if (self.mask is None) == (self.items is None):
            raise ValueError("exactly one of mask/items must be set")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def of(calculus: Calculus, codes: Iterable) -> "QualitativeRelation":
        codes = list(codes)
        for c in codes:
            if not calculus.is_code(c):
                raise CalculusError(f"unknown {calculus.name} code {c!r}")
        if calculus.uses_mask():
            m = 0
            for c in codes:
                m |= 1 << calculus.code_index(c)
            return QualitativeRelation(calculus, mask=m)
        return QualitativeRelation(calculus, items=frozenset(codes))

    @staticmethod
    def full(calculus: Calculus) -> "QualitativeRelation":
        if calculus.uses_mask():
            return QualitativeRelation(
                calculus, mask=(1 << calculus.code_count()) - 1)
        return QualitativeRelation(
            calculus, items=frozenset(calculus.iter_codes()))

    @staticmethod
    def empty(calculus: Calculus) -> "QualitativeRelation":
        if calculus.uses_mask():
            return QualitativeRelation(calculus, mask=0)
        return QualitativeRelation(calculus, items=frozenset())

    # -- set interface -----------------------------------------------------

    def codes(self) -> tuple:
        if self.mask is not None:
            all_codes = self.calculus.codes()
            return tuple(c for i, c in enumerate(all_codes) if self.mask >> i & 1)
        return tuple(sorted(self.items))

    def __contains__(self, code) -> bool:
        if self.mask is not None:
            return bool(self.mask >> self.calculus.code_index(code) & 1)
        return code in self.items

    def __len__(self) -> int:
        if self.mask is not None:
            return self.mask.bit_count()
        return len(self.items)

    def is_empty(self) -> bool:
        return len(self) == 0

    def _check_same(self, other: "QualitativeRelation"):
        if self.calculus is not other.calculus:
            raise CalculusError(
                f"calculus mismatch: {self.calculus.name} vs {other.calculus.name}")

    def __or__(self, other):
        self._check_same(other)
        if self.mask is not None:
            return QualitativeRelation(self.calculus, mask=self.mask | other.mask)
        return QualitativeRelation(self.calculus, items=self.items | other.items)

    def __and__(self, other):
        self._check_same(other)
        if self.mask is not None:
            return QualitativeRelation(self.calculus, mask=self.mask & other.mask)
        return QualitativeRelation(self.calculus, items=self.items & other.items)

    def __sub__(self, other):
        self._check_same(other)
        if self.mask is not None:
            return QualitativeRelation(self.calculus, mask=self.mask & ~other.mask)
        return QualitativeRelation(self.calculus, items=self.items - other.items)

    def complement(self) -> "QualitativeRelation":
        return QualitativeRelation.full(self.calculus) - self

    def converse(self) -> "QualitativeRelation":
        return QualitativeRelation.of(
            self.calculus, (self.calculus.converse_code(c) for c in self.codes()))

    def __repr__(self):
        names = ["(" + ",".join(c) + ")" if isinstance(c, tuple) else str(c)
                 for c in self.codes()]
        return f"{self.calculus.name}{{{' '.join(names)}}}"


def relation(calculus: Calculus, codes: Iterable) -> QualitativeRelation:
    return QualitativeRelation.of(calculus, codes)


def full_relation(calculus: Calculus) -> QualitativeRelation:
    return QualitativeRelation.full(calculus)


def empty_relation(calculus: Calculus) -> QualitativeRelation:
    return QualitativeRelation.empty(calculus)


# ---------------------------------------------------------------------------
# concrete evaluation


def basic_to_point_formula(calculus: Calculus, code, x: str = "X",
                           y: str = "Y") -> Dnf:
    """Defining order atoms of a basic code over named endpoint slots.

    The result is a disjunction of conjunctions; IA, BA_p, and CDC codes
    have exactly one disjunct, DIA codes may have two (one per shared
    direction).  Domain constraints (slot strictness) are not included.
    """
    return calculus.definition(code, x, y)


def holds(calculus: Calculus, code, a, b) -> bool:
    """Does the basic code hold between concrete elements a and b."""
    calculus.check_element(a)
    calculus.check_element(b)
    values = {}
    for slot, v in zip(calculus.slots_for("X"), a.endpoints()):
        values[slot] = v
    for slot, v in zip(calculus.slots_for("Y"), b.endpoints()):
        values[slot] = v
    return _eval_dnf(calculus.definition(code, "X", "Y"), values)


def relation_holds(rel: QualitativeRelation, a, b) -> bool:
    code = classify_pair(rel.calculus, a, b)
    return code is not None and code in rel


def classify_pair(calculus: Calculus, a, b):
    """The unique basic code holding between a and b.

    Returns None where no code applies: coincident CDC points, and
    directed-interval configurations outside the five-code fragment.
    """
    calculus.check_element(a)
    calculus.check_element(b)
    return calculus.classify_values(a.endpoints(), b.endpoints())


def converse(rel: QualitativeRelation) -> QualitativeRelation:
    return rel.converse()


def intersect(r: QualitativeRelation, s: QualitativeRelation) -> QualitativeRelation:
    return r & s


def union(r: QualitativeRelation, s: QualitativeRelation) -> QualitativeRelation:
    return r | s


# ---------------------------------------------------------------------------
# composition by weak-order enumeration

_VARS3 = ("X", "Y", "Z")


@lru_cache(maxsize=None)
def _compose_basic_single_group(calc_name: str, r, s) -> frozenset:
    """Composition of two basic codes for a single-group calculus.

    Enumerates weak orders over the six joint endpoint slots of X, Y, Z,
    keeps those satisfying the domain atoms and both definitions, and
    collects the classification of (X, Z).
    """
    from .points import enumerate_weak_orders

    calc = calculus_by_name(calc_name)
    slots = [s2 for v in _VARS3 for s2 in calc.slots_for(v)]
    need = []
    for v in _VARS3:
        need.extend(calc.domain_atoms(v))
    r_def = calc.definition(r, "X", "Y")
    s_def = calc.definition(s, "Y", "Z")
    out = set()
    for w in enumerate_weak_orders(len(slots)):
        values = {slot: rank for slot, rank in zip(slots, w.ranks)}
        if not _eval_conjunction(tuple(need), values):
            continue
        if not (_eval_dnf(r_def, values) and _eval_dnf(s_def, values)):
            continue
        xvals = tuple(values[s3] for s3 in calc.slots_for("X"))
        zvals = tuple(values[s3] for s3 in calc.slots_for("Z"))
        code = calc.classify_values(xvals, zvals)
        if code is not None:
            out.add(code)
    return frozenset(out)


@lru_cache(maxsize=None)
def _compose_cdc_axis(c1: str, c2: str) -> frozenset:
    """Per-axis outcome set for composing two coordinate comparisons."""
    from .points import enumerate_weak_orders

    out = set()
    for w in enumerate_weak_orders(3):  # ranks of (Xc, Yc, Zc)
        a, b, c = w.ranks
        d1 = "=" if a == b else ("<" if a < b else ">")
        d2 = "=" if b == c else ("<" if b < c else ">")
        if d1 == c1 and d2 == c2:
            out.add("=" if a == c else ("<" if a < c else ">"))
    return frozenset(out)


def _compose_basic(calculus: Calculus, r, s) -> frozenset:
    if calculus is IA or calculus is DIA:
        return _compose_basic_single_group(calculus.name, r, s)
    if isinstance(calculus, _BACalculus):
        per_axis = [_compose_basic_single_group("IA", r[i], s[i])
                    for i in range(calculus.p)]
        return frozenset(itertools.product(*per_axis))
    if calculus is CDC:
        xs = _compose_cdc_axis(CDC_AXES[r][0], CDC_AXES[s][0])
        ys = _compose_cdc_axis(CDC_AXES[r][1], CDC_AXES[s][1])
        out = set()
        for cx in xs:
            for cy in ys:
                code = CDC_BY_AXES.get((cx, cy))
                if code is not None:
                    out.add(code)
        return frozenset(out)
    raise CalculusError(f"composition unsupported for {calculus.name}")


def compose(r: QualitativeRelation, s: QualitativeRelation) -> QualitativeRelation:
    """Relational composition: all codes t with r(a,b), s(b,c), t(a,c).

    Computed exactly by weak-order enumeration over the joint endpoint
    slots; no stored composition tables.  Configurations of (a, c) that
    fall outside the codespace (coincident CDC points, uncovered DIA
    configurations) contribute nothing.
    """
    if r.calculus is not s.calculus:
        raise CalculusError(
            f"calculus mismatch: {r.calculus.name} vs {s.calculus.name}")
    out = empty_relation(r.calculus)
    for rc in r.codes():
        for sc in s.codes():
            out = out | QualitativeRelation.of(
                r.calculus, _compose_basic(r.calculus, rc, sc))
    return out


# ---------------------------------------------------------------------------
# translations


def apply_translation(element, offsets):
    """Shift an element per axis; offsets has one Rational per axis.

    Intervals and directed intervals have one axis, plane points and
    rectangles two, blocks p.
    """
    offsets = tuple(_q(o) for o in offsets)

    def need(n):
        if len(offsets) != n:
            raise ValueError(f"expected {n} offsets, got {len(offsets)}")

    if isinstance(element, Interval):
        need(1)
        return Interval(element.lo + offsets[0], element.hi + offsets[0])
    if isinstance(element, Block):
        need(element.dim)
        return Block(tuple(
            Interval(a.lo + o, a.hi + o)
            for a, o in zip(element.axes, offsets)))
    if isinstance(element, PlanePoint):
        need(2)
        return PlanePoint(element.x + offsets[0], element.y + offsets[1])
    if isinstance(element, DirectedInterval):
        need(1)
        return DirectedInterval(element.start + offsets[0], element.end + offsets[0])
    raise TypeError(f"cannot translate {type(element).__name__}")


# ---------------------------------------------------------------------------
# qualitative instances


@dataclass(frozen=True)
class QualInstance:
    """CSP over one calculus: binary constraints plus DIA forw literals."""

    calculus: Calculus
    variables: tuple[str, ...]
    constraints: tuple[tuple[str, QualitativeRelation, str], ...]
    forw_vars: tuple[str, ...] = ()

    def __post_init__(self):
        declared = set(self.variables)
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variable names")
        for x, rel, y in self.constraints:
            if x not in declared or y not in declared:
                raise ValueError(f"constraint on undeclared variable: {x}, {y}")
            if rel.calculus is not self.calculus:
                raise CalculusError("constraint relation from a different calculus")
        for v in self.forw_vars:
            if v not in declared:
                raise ValueError(f"forw on undeclared variable {v}")
        if self.forw_vars and self.calculus is not DIA:
            raise CalculusError("forw constraints only exist in DIA")

    def satisfied_by(self, assignment: dict) -> bool:
        for v in self.variables:
            if v not in assignment:
                return False
            self.calculus.check_element(assignment[v])
        for x, rel, y in self.constraints:
            if not relation_holds(rel, assignment[x], assignment[y]):
                return False
        for v in self.forw_vars:
            if not assignment[v].forward:
                return False
        return True
