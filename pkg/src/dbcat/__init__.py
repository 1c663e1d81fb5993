"""dbcat: bounded query-closure semantics for relational instances.

The library treats a database instance as the set of views its relations can
express through select / project / join / union queries up to an arity
bound.  On top of that closure it provides instance comparison, morphisms
built from view mappings with their information flux, a closure
endofunctor with unit, Kleisli-style programs, query rewriting across
mappings, and guarded equation systems — plus the ``dbcat`` command-line
front end.
"""

from .errors import *  # noqa: F401,F403
from .relcore import (  # noqa: F401
    Bottom,
    DomainConst,
    Instance,
    View,
    active_domain,
    canonicalize_view,
    const,
    format_dbi,
    make_instance,
    parse_dbi,
    same_extension,
    views_of,
)
from .query import (  # noqa: F401
    BottomTerm,
    Cond,
    JCond,
    Join,
    Project,
    QueryTerm,
    RelRef,
    Select,
    UnionTerm,
    apply_join,
    apply_project,
    apply_select,
    apply_union,
    check_term,
    enumerate_terms,
    eval_term,
    parse_term,
    print_term,
    term_size,
)
from .closure import (  # noqa: F401
    ClosedSet,
    closure,
    coproduct,
    equiv,
    format_closure,
    format_view,
    intersect_closed,
    leq,
    match_op,
    materialize,
    member,
    merge_fixpoint_iterate,
    merge_instances,
    merge_op,
    quotient_term_algebra,
)

__version__ = "0.1.0"
