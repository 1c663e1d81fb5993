"""Bounded view saturation: every view expressible over an instance.

``closure(A, k)`` computes the set of all views of arity at most ``k``
definable from ``A``'s relations by select / project / join / union, together
with one canonical witnessing term per view.  The algorithm works on bitmask
images of views and runs in two phases:

1. **Operator phase.**  Breadth-first by term size over a canonical family
   of single steps: one-condition selects (position = active constant, or
   position = later position), projections onto any index list within the
   arity bound, and cartesian joins (``join[]``; conditioned joins are
   selects over a cartesian join, so they add nothing).  Every new view
   records the witness that is smallest by (term size, printed form) within
   this family — candidates of equal size compete on their printed form.

2. **Union phase.**  Select, project, and join all distribute over union, so
   the full closure is exactly the union-closure of the operator phase's
   views.  Unions are generated by subset-OR over the phase-1 views; each
   union composite is witnessed by a deterministic greedy decomposition.

The raw term language admits infinitely many witnesses for any view (a
condition list may repeat entries endlessly), so "smallest witness" is only
meaningful relative to a fixed candidate family; the family above is the one
this package guarantees, and it is stable across runs and kernels.

The empty view is a member of every closure.  Its witness is a selection on
the reserved constant ``_impossible_`` (which no instance may declare) over
the alphabetically first relation, or the ``bottom`` leaf when the instance
has no relations.
"""

from __future__ import annotations

from typing import Optional

from . import _satcore
from .errors import (
    BoundMismatch,
    BoundTooSmall,
    CrossComponentTerm,
    ResourceLimit,
)
from .query import (
    BottomTerm,
    Cond,
    Join,
    Project,
    QueryTerm,
    RelRef,
    Select,
    UnionTerm,
    _canonical_projects,
    enumerate_terms,
    eval_term,
    print_term,
)
from .relcore import (
    Bottom,
    IMPOSSIBLE_CONST,
    Instance,
    View,
    _build_instance,
    _intern_view,
    const,
)

__all__ = [
    "ClosedSet",
    "closure",
    "member",
    "equiv",
    "leq",
    "match_op",
    "merge_op",
    "merge_instances",
    "coproduct",
    "merge_fixpoint_iterate",
    "quotient_term_algebra",
    "materialize",
    "intersect_closed",
    "format_closure",
    "format_view",
]

_UNLIMITED = 2**62


# ---------------------------------------------------------------------------
# Mask algebra: tuples of arity n over d constants are mixed-radix numbers
# (first column most significant), views are bit sets of tuple numbers.
# Tables depend only on d, so they are shared across all instances with the
# same domain size.
# ---------------------------------------------------------------------------


class _Algebra:
    def __init__(self, d: int):
        self.d = d
        self._digits: dict = {0: [()]}
        self._sel_const: dict = {}
        self._sel_pos: dict = {}
        self._proj: dict = {}

    def pows(self, up_to: int) -> list:
        return [self.d**k for k in range(up_to + 1)]

    def digits(self, n: int) -> list:
        """All digit tuples of length n, in numeric (= lexicographic) order."""
        got = self._digits.get(n)
        if got is None:
            shorter = self.digits(n - 1)
            got = self._digits[n] = [t + (c,) for t in shorter for c in range(self.d)]
        return got

    def encode_digits(self, digs) -> int:
        r = 0
        for c in digs:
            r = r * self.d + c
        return r

    def sel_const_mask(self, n: int, i: int, cidx: int) -> int:
        key = (n, i, cidx)
        m = self._sel_const.get(key)
        if m is None:
            m = 0
            for idx, digs in enumerate(self.digits(n)):
                if digs[i - 1] == cidx:
                    m |= 1 << idx
            self._sel_const[key] = m
        return m

    def sel_pos_mask(self, n: int, i: int, j: int) -> int:
        key = (n, i, j)
        m = self._sel_pos.get(key)
        if m is None:
            m = 0
            for idx, digs in enumerate(self.digits(n)):
                if digs[i - 1] == digs[j - 1]:
                    m |= 1 << idx
            self._sel_pos[key] = m
        return m

    def proj_map(self, n: int, idxs: tuple) -> list:
        key = (n, idxs)
        got = self._proj.get(key)
        if got is None:
            got = [
                self.encode_digits(tuple(digs[i - 1] for i in idxs))
                for digs in self.digits(n)
            ]
            self._proj[key] = got
        return got


_ALGEBRAS: dict = {}


def _algebra(d: int) -> _Algebra:
    alg = _ALGEBRAS.get(d)
    if alg is None:
        alg = _ALGEBRAS[d] = _Algebra(d)
    return alg


_DECODE_CACHE: dict = {}


def _decode_key(universe: tuple, alg: _Algebra, key: tuple) -> View:
    got = _DECODE_CACHE.get((universe, key))
    if got is None:
        n, mask = key
        digit_table = alg.digits(n)
        rows = []
        m = mask
        while m:
            b = (m & -m).bit_length() - 1
            rows.append(tuple(universe[c] for c in digit_table[b]))
            m &= m - 1
        # ascending bit order is ascending row order, so rows are sorted
        got = _intern_view(n, tuple(rows))
        _DECODE_CACHE[(universe, key)] = got
    return got


def _encode_view(universe_index: dict, d: int, view: View) -> Optional[tuple]:
    """The (arity, mask) key of ``view`` in this universe, or None if a
    constant of the view does not belong to the universe."""
    mask = 0
    for row in view:
        idx = 0
        for c in row:
            ci = universe_index.get(c)
            if ci is None:
                return None
            idx = idx * d + ci
        mask |= 1 << idx
    return (view.arity, mask)


# ---------------------------------------------------------------------------
# Saturation driver
# ---------------------------------------------------------------------------


def _saturate(universe, d, bound, base_pairs, kernel, max_new):
    """Saturate ``base_pairs`` (name, arity, nonzero mask) and return the
    derivation map key -> deriv, in discovery order.

    Deriv tuples: ("base", name) | ("sel", Cond, parent) |
    ("proj", idxs, parent) | ("join", lkey, rkey) | ("uni", lkey, rkey).
    """
    alg = _algebra(d)
    derivs: dict = {}
    prints: dict = {}
    buckets: dict = {}  # witness size -> keys, for the unary frontier
    jbuckets: dict = {}  # (witness size, arity) -> keys, for join operands
    known = kernel.KnownSet(bound)

    def _bucket(size: int, keys) -> None:
        buckets[size] = keys
        for k in keys:
            if k[0] < bound:  # wider views cannot take part in any join
                jbuckets.setdefault((size, k[0]), []).append(k)

    # Active constants: those occurring in the base views.
    active_bits = set()
    for _name, n, mask in base_pairs:
        digit_table = alg.digits(n)
        m = mask
        while m:
            b = (m & -m).bit_length() - 1
            active_bits.update(digit_table[b])
            m &= m - 1
    active = sorted(active_bits)

    # Canonical single-step tables per arity (index 0 unused).
    sel_masks: list = [[]]
    sel_params: list = [[]]
    proj_specs: list = [[]]
    proj_params: list = [[]]
    for n in range(1, bound + 1):
        sm, sp = [], []
        for i in range(1, n + 1):
            for cidx in active:
                sm.append(alg.sel_const_mask(n, i, cidx))
                sp.append(Cond(i, universe[cidx]))
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                sm.append(alg.sel_pos_mask(n, i, j))
                sp.append(Cond(i, j))
        sel_masks.append(sm)
        sel_params.append(sp)
        pm, pp = [], []
        for idxs in _canonical_projects(n, bound):
            pm.append((len(idxs), alg.proj_map(n, idxs)))
            pp.append(tuple(idxs))
        proj_specs.append(pm)
        proj_params.append(pp)

    pows = alg.pows(bound)

    # Wave 1: the base relations themselves (first name in sorted order wins
    # for extensionally equal relations).
    first = []
    for name, n, mask in sorted(base_pairs, key=lambda p: p[0]):
        key = (n, mask)
        if key not in derivs:
            derivs[key] = ("base", name)
            prints[key] = name
            known.add(n, mask)
            first.append(key)
    if len(derivs) > max_new:
        raise ResourceLimit(f"view ceiling {max_new} exceeded by the base relations")
    _bucket(1, sorted(first, key=prints.__getitem__))

    max_size = 1
    s = 2
    while s <= 2 * max_size + 1:
        cands = []
        frontier = buckets.get(s - 1, ())
        if frontier:
            fa = [k[0] for k in frontier]
            fm = [k[1] for k in frontier]
            for ra, rm, op, pid, pos in kernel.fire_unary(
                fa, fm, sel_masks, proj_specs, known
            ):
                parent = frontier[pos]
                n = parent[0]
                if op == 0:
                    cond = sel_params[n][pid]
                    cands.append(
                        (
                            (ra, rm),
                            ("sel", cond, parent),
                            f"select[{cond}]({prints[parent]})",
                        )
                    )
                else:
                    idxs = proj_params[n][pid]
                    cands.append(
                        (
                            (ra, rm),
                            ("proj", idxs, parent),
                            f"project[{','.join(map(str, idxs))}]({prints[parent]})",
                        )
                    )
        for a in range(1, s - 1):
            b = s - 1 - a
            for n1 in range(1, bound):
                left = jbuckets.get((a, n1))
                if not left:
                    continue
                for n2 in range(1, bound - n1 + 1):
                    right = jbuckets.get((b, n2))
                    if not right:
                        continue
                    res = kernel.fire_joins(
                        n1 + n2,
                        [k[1] for k in left],
                        [k[1] for k in right],
                        pows[n2],
                        known,
                    )
                    for rm, i, j in res:
                        kl, kr = left[i], right[j]
                        cands.append(
                            (
                                (n1 + n2, rm),
                                ("join", kl, kr),
                                f"join[]({prints[kl]},{prints[kr]})",
                            )
                        )
        if cands:
            chosen: dict = {}
            for key, deriv, p in cands:
                cur = chosen.get(key)
                if cur is None or p < cur[1]:
                    chosen[key] = (deriv, p)
            if len(derivs) + len(chosen) > max_new:
                raise ResourceLimit(
                    f"view ceiling {max_new} exceeded during saturation"
                )
            wave_keys = sorted(chosen, key=lambda k: chosen[k][1])
            for k in wave_keys:
                deriv, p = chosen[k]
                derivs[k] = deriv
                prints[k] = p
                known.add(k[0], k[1])
            _bucket(s, wave_keys)
            max_size = s
        s += 1

    # Union phase, one arity at a time.
    for n in range(1, bound + 1):
        gens = sorted(
            (k[1] for k in derivs if k[0] == n),
            key=lambda m: (m.bit_count(), m),
        )
        if len(gens) < 2:
            continue
        budget = max_new - len(derivs)
        records, overflow = kernel.union_close(n, gens, known, budget)
        if overflow:
            raise ResourceLimit(f"view ceiling {max_new} exceeded during union closure")
        for mask, lmask, gmask in records:
            derivs[(n, mask)] = ("uni", (n, lmask), (n, gmask))

    return derivs


# ---------------------------------------------------------------------------
# Closed sets
# ---------------------------------------------------------------------------


class ClosedSet:
    """The saturation result: views (as mask keys) plus witness derivations.

    Intersections share the derivation graph of their left operand, so a
    witness may pass through views outside the set itself — that is sound,
    every witness is a term over the base instance evaluating to its view.
    """

    __slots__ = (
        "base",
        "bound",
        "universe",
        "_ordered",
        "_keyset",
        "_derivs",
        "_comp_keys",
        "_views",
        "_terms",
        "_sorted_pairs",
        "_materialized",
        "_bottom",
    )

    def __init__(self, base, bound, universe, ordered_keys, derivs, comp_keys=None):
        self.base = base
        self.bound = bound
        self.universe = universe
        self._ordered = tuple(ordered_keys)
        self._keyset = frozenset(self._ordered)
        self._derivs = derivs
        self._comp_keys = comp_keys
        self._views = None
        self._terms: dict = {}
        self._sorted_pairs = None
        self._materialized = None
        self._bottom = None

    @property
    def view_count(self) -> int:
        """Number of views including the empty one."""
        return len(self._ordered) + 1

    @property
    def views(self) -> frozenset:
        vs = self._views
        if vs is None:
            alg = _algebra(len(self.universe))
            vs = frozenset(
                _decode_key(self.universe, alg, k) for k in self._ordered
            ) | {Bottom}
            self._views = vs
        return vs

    def sorted_pairs(self) -> list:
        """(View, key) pairs in canonical order (arity, then row-list)."""
        sp = self._sorted_pairs
        if sp is None:
            alg = _algebra(len(self.universe))
            sp = sorted(
                ((_decode_key(self.universe, alg, k), k) for k in self._ordered),
                key=lambda p: p[0].sort_key(),
            )
            self._sorted_pairs = sp
        return sp

    def bottom_witness(self) -> QueryTerm:
        w = self._bottom
        if w is None:
            if self.base.relations:
                w = Select(
                    (Cond(1, const(IMPOSSIBLE_CONST)),),
                    RelRef(min(self.base.relations)),
                )
            else:
                w = BottomTerm()
            self._bottom = w
        return w

    def term_for_key(self, key) -> QueryTerm:
        memo = self._terms
        got = memo.get(key)
        if got is not None:
            return got
        stack = [key]
        while stack:
            k = stack[-1]
            if k in memo:
                stack.pop()
                continue
            d = self._derivs[k]
            tag = d[0]
            if tag == "base":
                memo[k] = RelRef(d[1])
                stack.pop()
            elif tag == "sel":
                p = d[2]
                if p in memo:
                    memo[k] = Select((d[1],), memo[p])
                    stack.pop()
                else:
                    stack.append(p)
            elif tag == "proj":
                p = d[2]
                if p in memo:
                    memo[k] = Project(d[1], memo[p])
                    stack.pop()
                else:
                    stack.append(p)
            else:
                l, r = d[1], d[2]
                missing = [q for q in (l, r) if q not in memo]
                if missing:
                    stack.extend(missing)
                else:
                    if tag == "join":
                        memo[k] = Join((), memo[l], memo[r])
                    else:
                        memo[k] = UnionTerm(memo[l], memo[r])
                    stack.pop()
        return memo[key]

    @property
    def witnesses(self) -> dict:
        """Full witness map View -> term (includes the empty view)."""
        out = {Bottom: self.bottom_witness()}
        for view, key in self.sorted_pairs():
            out[view] = self.term_for_key(key)
        return out

    def contains_view(self, v: View) -> bool:
        if v.is_bottom:
            return True
        key = _encode_view(
            {c: i for i, c in enumerate(self.universe)}, len(self.universe), v
        )
        return key is not None and key in self._keyset

    def same_views(self, other: "ClosedSet") -> bool:
        if self is other:
            return True
        if self.universe == other.universe:
            return self._keyset == other._keyset
        return self.views == other.views

    def subset_of(self, other: "ClosedSet") -> bool:
        if self is other:
            return True
        if self.universe == other.universe:
            return self._keyset <= other._keyset
        return self.views <= other.views

    def __repr__(self) -> str:
        return (
            f"ClosedSet({self.base.name!r}, bound={self.bound}, "
            f"views={self.view_count})"
        )


def intersect_closed(left: ClosedSet, right: ClosedSet) -> ClosedSet:
    """Intersection of two closed sets (closed again; witnesses from the left)."""
    if left.bound != right.bound:
        raise BoundMismatch(
            f"cannot intersect closures at bounds {left.bound} and {right.bound}"
        )
    if left.universe == right.universe:
        keys = [k for k in left._ordered if k in right._keyset]
    else:
        rviews = right.views
        alg = _algebra(len(left.universe))
        keys = [
            k
            for k in left._ordered
            if _decode_key(left.universe, alg, k) in rviews
        ]
    return ClosedSet(left.base, left.bound, left.universe, keys, left._derivs)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def closure(inst: Instance, bound: int, max_views: Optional[int] = None) -> ClosedSet:
    """All views of arity <= ``bound`` expressible over ``inst``.

    Raises :class:`BoundTooSmall` when some relation is wider than ``bound``
    and :class:`ResourceLimit` when the result would hold more than
    ``max_views`` views (``None`` = no ceiling).  Results are cached per
    instance and bound.
    """
    if bound < 1:
        raise BoundTooSmall(f"arity bound must be positive, got {bound}")
    widest = max(inst.relation_arities.values(), default=0)
    if widest > bound:
        raise BoundTooSmall(
            f"instance {inst.name!r} has a relation of arity {widest} > bound {bound}"
        )
    ceiling = _UNLIMITED if max_views is None else max_views

    cached = inst._closure_cache.get(bound)
    if cached is not None:
        if cached.view_count - 1 > ceiling:
            raise ResourceLimit(
                f"closure holds {cached.view_count - 1} views, over the ceiling {ceiling}"
            )
        return cached

    universe = tuple(sorted(inst.declared_domain))
    index = {c: i for i, c in enumerate(universe)}
    d = len(universe)
    kernel = _satcore.pick_kernel(d**bound)

    groups = inst.components
    if groups is None:
        groups = (frozenset(inst.relations),)

    derivs: dict = {}
    comp_keys = []
    for group in groups:
        base_pairs = []
        for name in inst.relations:  # declaration order, restricted to the group
            if name not in group:
                continue
            view = inst.relations[name]
            if view.is_bottom:
                continue
            key = _encode_view(index, d, view)
            base_pairs.append((name, key[0], key[1]))
        sub = _saturate(universe, d, bound, base_pairs, kernel, ceiling - len(derivs))
        comp_keys.append(frozenset(sub))
        for k, dv in sub.items():
            if k not in derivs:
                derivs[k] = dv
    result = ClosedSet(
        inst,
        bound,
        universe,
        tuple(derivs),
        derivs,
        tuple(comp_keys) if inst.components is not None else None,
    )
    inst._closure_cache[bound] = result
    return result


def member(closed: ClosedSet, v: View):
    """Is ``v`` in the closed set?  Returns ``(bool, witness-or-None)``."""
    if v.is_bottom:
        return True, closed.bottom_witness()
    index = {c: i for i, c in enumerate(closed.universe)}
    key = _encode_view(index, len(closed.universe), v)
    if key is None or key not in closed._keyset:
        return False, None
    return True, closed.term_for_key(key)


def equiv(a: Instance, b: Instance, bound: int, max_views: Optional[int] = None) -> bool:
    """Do ``a`` and ``b`` express exactly the same views at this bound?"""
    return closure(a, bound, max_views).same_views(closure(b, bound, max_views))


def leq(a: Instance, b: Instance, bound: int, max_views: Optional[int] = None) -> bool:
    """Is every view expressible over ``a`` also expressible over ``b``?"""
    return closure(a, bound, max_views).subset_of(closure(b, bound, max_views))


def match_op(a: Instance, b: Instance, bound: int, max_views: Optional[int] = None) -> ClosedSet:
    """The views expressible over both instances (witnesses over ``a``)."""
    return intersect_closed(closure(a, bound, max_views), closure(b, bound, max_views))


def merge_instances(a: Instance, b: Instance) -> Instance:
    """One instance holding both relation lists (``b``'s colliding names get
    an ``m2.`` prefix) over the union of the domains."""
    if a.components is not None or b.components is not None:
        raise CrossComponentTerm("merge of component-partitioned instances is not supported")
    rels = dict(a.relations)
    arities = dict(a.relation_arities)
    for name, view in b.relations.items():
        nm = name
        while nm in rels:
            nm = "m2." + nm
        rels[nm] = view
        arities[nm] = b.relation_arities[name]
    return _build_instance(
        f"{a.name}+{b.name}",
        rels,
        arities,
        a.declared_domain | b.declared_domain,
    )


def merge_op(a: Instance, b: Instance, bound: int, max_views: Optional[int] = None) -> ClosedSet:
    """Closure of the merged instance: every view expressible over the two
    instances pooled together."""
    return closure(merge_instances(a, b), bound, max_views)


def coproduct(a: Instance, b: Instance) -> Instance:
    """The separated sum: both instances side by side, with relation names
    prefixed ``L.`` / ``R.`` and a component marker forbidding terms that mix
    sides.  Closing it closes each side independently."""
    comps_a = a.components if a.components is not None else (frozenset(a.relations),)
    comps_b = b.components if b.components is not None else (frozenset(b.relations),)
    rels: dict = {}
    arities: dict = {}
    for name, view in a.relations.items():
        rels["L." + name] = view
        arities["L." + name] = a.relation_arities[name]
    for name, view in b.relations.items():
        rels["R." + name] = view
        arities["R." + name] = b.relation_arities[name]
    components = tuple(frozenset("L." + n for n in g) for g in comps_a) + tuple(
        frozenset("R." + n for n in g) for g in comps_b
    )
    return _build_instance(
        f"{a.name}+{b.name}",
        rels,
        arities,
        a.declared_domain | b.declared_domain,
        components,
    )


def materialize(closed: ClosedSet, name: Optional[str] = None) -> Instance:
    """Present a closed set as an instance: one relation per non-empty view,
    named ``v1, v2, ...`` in canonical view order."""
    if name is None and closed._materialized is not None:
        return closed._materialized
    pairs = closed.sorted_pairs()
    rels: dict = {}
    arities: dict = {}
    names_by_key: dict = {}
    for i, (view, key) in enumerate(pairs, start=1):
        rels[f"v{i}"] = view
        arities[f"v{i}"] = view.arity
        names_by_key[key] = f"v{i}"
    components = None
    if closed._comp_keys is not None:
        components = tuple(
            frozenset(names_by_key[k] for k in comp if k in names_by_key)
            for comp in closed._comp_keys
        )
    inst = _build_instance(
        name if name is not None else f"T({closed.base.name})",
        rels,
        arities,
        frozenset(closed.universe),
        components,
    )
    if name is None:
        closed._materialized = inst
    return inst


def merge_fixpoint_iterate(
    inst: Instance, bound: int, max_views: Optional[int] = None
) -> list:
    """Iterate ``S0 = {empty}``, ``S(n+1) = merge-closure(inst, Sn)`` until
    fixed; returns the chain (without the repeated final element)."""
    start = _build_instance(f"{inst.name}.s0", {}, {}, inst.declared_domain)
    chain = [closure(start, bound, max_views)]
    while True:
        step_inst = materialize(chain[-1], name=f"{inst.name}.s{len(chain) - 1}")
        nxt = merge_op(inst, step_inst, bound, max_views)
        if nxt.same_views(chain[-1]):
            return chain
        chain.append(nxt)


def quotient_term_algebra(
    inst: Instance, depth: int, bound: int
) -> dict:
    """Group all canonical terms of depth <= ``depth`` by their value.

    Returns a map View -> list of terms (in enumeration order).  An instance
    with no relations has no terms and yields an empty partition.
    """
    out: dict = {}
    for t in enumerate_terms(inst, depth, bound):
        v = eval_term(t, inst)
        out.setdefault(v, []).append(t)
    return out


# ---------------------------------------------------------------------------
# Report formatting (shared by the CLI and the tests)
# ---------------------------------------------------------------------------


def format_view(view: View) -> str:
    return ";".join("(" + ",".join(c.symbol for c in row) + ")" for row in view)


def format_closure(closed: ClosedSet) -> str:
    """One line per view in canonical order; the empty view leads."""
    lines = ["arity=0 tuples= witness=bottom"]
    for view, key in closed.sorted_pairs():
        lines.append(
            f"arity={view.arity} tuples={format_view(view)} "
            f"witness={print_term(closed.term_for_key(key))}"
        )
    return "\n".join(lines)
