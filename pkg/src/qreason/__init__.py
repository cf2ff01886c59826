"""Qualitative spatio-temporal constraint reasoning via point interpretations."""

__version__ = "0.1.0"

from .relations import (  # noqa: F401
    BA,
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
    QualitativeRelation,
    Rational,
    apply_translation,
    basic_to_point_formula,
    block,
    calculus_by_name,
    classify_pair,
    compose,
    converse,
    empty_relation,
    full_relation,
    holds,
    intersect,
    relation,
    relation_holds,
    union,
)
from .points import (  # noqa: F401
    ConjunctiveStore,
    PointInstance,
    PointRelation,
    WeakOrder,
    conjunction_satisfiable,
    enumerate_weak_orders,
    iter_weak_orders,
    rank_matrix,
    relation_of,
    weak_order_of,
)
from .formulas import (  # noqa: F401
    POINT,
    PPFormula,
    RelAtom,
    eval_pp_formula,
)
from .interp import (  # noqa: F401
    CompositionError,
    HomotopyCheck,
    HomotopyWitness,
    Interpretation,
    catalog,
    check_homotopy_identity,
    eliminate_forw,
    identity_interpretation,
    translate_instance,
)
from .interp import compose as compose_interpretations  # noqa: F401
from .polycheck import (  # noqa: F401
    DUAL_PP,
    PP,
    JointRealization,
    PolyCheckError,
    ThresholdOp,
    Violation,
    apply_op,
    preserved_by,
    tractability_report,
    violations,
)
from .horn import (  # noqa: F401
    ClauseError,
    ClauseSet,
    LLClause,
    ORDClause,
    OrdPropagation,
    is_ll_horn,
    is_ord_horn,
    llhorn_definable,
    minimize,
    models_of,
    ordhorn_definable,
    ordhorn_satisfiable,
    parse_clause,
    parse_clauses,
    propagate_ord,
    relation_mask,
    render_clause,
    render_clauses,
)
from .solver import (  # noqa: F401
    BRUTEFORCE_SLOT_CAP,
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
