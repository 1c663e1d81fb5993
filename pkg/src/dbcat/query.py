"""Query terms: select / project / join / union over instance relations.

Terms are positional (1-based indices) and purely set-valued.  ``join``
concatenates its operands' columns and keeps the pairs satisfying the join
conditions (``join[]`` is the cartesian product); ``select`` filters by a
conjunction of ``position = constant`` / ``position = position`` conditions;
``project`` may repeat and reorder columns.  There is no negation.

``bottom`` is a special leaf denoting the empty view; it exists so the empty
view has a printable witness even over an instance with no relations.  By
convention it has arity 0, and no positional operator applies to it.

The printed form is canonical: ``parse_term(print_term(t)) == t``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Union as TypingUnion

from .errors import (
    BoundTooSmall,
    CrossComponentTerm,
    IndexOutOfRange,
    ParseError,
    UnionArityMismatch,
    UnknownRelation,
)
from .relcore import (
    Bottom,
    DomainConst,
    Instance,
    View,
    active_domain,
    canonicalize_view,
    const,
)

__all__ = [
    "Cond",
    "JCond",
    "RelRef",
    "Select",
    "Project",
    "Join",
    "UnionTerm",
    "BottomTerm",
    "QueryTerm",
    "parse_term",
    "print_term",
    "term_size",
    "check_term",
    "eval_term",
    "apply_select",
    "apply_project",
    "apply_join",
    "apply_union",
    "enumerate_terms",
]


@dataclass(frozen=True)
class Cond:
    """One selection condition: column ``index`` equals a constant or another column."""

    index: int
    value: TypingUnion[DomainConst, int]

    def __str__(self) -> str:
        v = self.value.symbol if isinstance(self.value, DomainConst) else str(self.value)
        return f"{self.index}={v}"


@dataclass(frozen=True)
class JCond:
    """One join condition: left column ``left`` equals right column ``right``."""

    left: int
    right: int

    def __str__(self) -> str:
        return f"l{self.left}=r{self.right}"


@dataclass(frozen=True)
class RelRef:
    name: str


@dataclass(frozen=True)
class Select:
    conds: tuple
    arg: "QueryTerm"


@dataclass(frozen=True)
class Project:
    indices: tuple
    arg: "QueryTerm"


@dataclass(frozen=True)
class Join:
    conds: tuple
    left: "QueryTerm"
    right: "QueryTerm"


@dataclass(frozen=True)
class UnionTerm:
    left: "QueryTerm"
    right: "QueryTerm"


@dataclass(frozen=True)
class BottomTerm:
    """Leaf denoting the empty view."""


QueryTerm = TypingUnion[RelRef, Select, Project, Join, UnionTerm, BottomTerm]


def print_term(t: QueryTerm) -> str:
    """Render ``t`` in the canonical (whitespace-free) form."""
    if isinstance(t, RelRef):
        return t.name
    if isinstance(t, BottomTerm):
        return "bottom"
    if isinstance(t, Select):
        return f"select[{','.join(map(str, t.conds))}]({print_term(t.arg)})"
    if isinstance(t, Project):
        return f"project[{','.join(map(str, t.indices))}]({print_term(t.arg)})"
    if isinstance(t, Join):
        return (
            f"join[{','.join(map(str, t.conds))}]"
            f"({print_term(t.left)},{print_term(t.right)})"
        )
    if isinstance(t, UnionTerm):
        return f"union({print_term(t.left)},{print_term(t.right)})"
    raise TypeError(f"not a query term: {t!r}")


def term_size(t: QueryTerm) -> int:
    """Number of operator/leaf nodes in ``t``."""
    if isinstance(t, (RelRef, BottomTerm)):
        return 1
    if isinstance(t, (Select, Project)):
        return 1 + term_size(t.arg)
    return 1 + term_size(t.left) + term_size(t.right)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)|(?P<int>\d+)|(?P<sym>[][(),=])"
)

_OPERATOR_WORDS = {"select", "project", "join", "union"}
_NON_REL_WORDS = {"rel", "domain", "relation"}


class _Tokens:
    """Token stream with 1-based line/column tracking."""

    def __init__(self, text: str):
        self.toks: list = []  # (kind, value, line, col)
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            lexeme = m.group(0)
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, lexeme, line, col))
            newlines = lexeme.count("\n")
            if newlines:
                line += newlines
                col = len(lexeme) - lexeme.rfind("\n")
            else:
                col += len(lexeme)
            pos = m.end()
        self.toks.append(("eof", "", line, col))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, sym: str):
        kind, value, line, col = self.next()
        if value != sym:
            raise ParseError(f"expected {sym!r}, found {value or 'end of input'!r}", line, col)

    def fail(self, message: str):
        _, value, line, col = self.peek()
        raise ParseError(message, line, col)


def _parse_int(ts: _Tokens) -> int:
    kind, value, line, col = ts.next()
    if kind != "int":
        raise ParseError(f"expected a position index, found {value or 'end of input'!r}", line, col)
    return int(value)


def _parse_cond(ts: _Tokens) -> Cond:
    index = _parse_int(ts)
    ts.expect("=")
    kind, value, line, col = ts.next()
    if kind == "int":
        return Cond(index, int(value))
    if kind == "name":
        return Cond(index, const(value))
    raise ParseError(f"expected a constant or position after '=', found {value!r}", line, col)


def _parse_jcond(ts: _Tokens) -> JCond:
    kind, value, line, col = ts.next()
    m = re.fullmatch(r"l(\d+)", value) if kind == "name" else None
    if not m:
        raise ParseError(f"expected l<i>=r<j>, found {value or 'end of input'!r}", line, col)
    left = int(m.group(1))
    ts.expect("=")
    kind, value, line, col = ts.next()
    m = re.fullmatch(r"r(\d+)", value) if kind == "name" else None
    if not m:
        raise ParseError(f"expected r<j>, found {value or 'end of input'!r}", line, col)
    return JCond(left, int(m.group(1)))


def _parse_term(ts: _Tokens) -> QueryTerm:
    kind, value, line, col = ts.next()
    if kind != "name":
        raise ParseError(f"expected a term, found {value or 'end of input'!r}", line, col)
    if value == "bottom":
        return BottomTerm()
    if value == "select":
        ts.expect("[")
        conds = [_parse_cond(ts)]
        while ts.peek()[1] == ",":
            ts.next()
            conds.append(_parse_cond(ts))
        ts.expect("]")
        ts.expect("(")
        arg = _parse_term(ts)
        ts.expect(")")
        return Select(tuple(conds), arg)
    if value == "project":
        ts.expect("[")
        indices = [_parse_int(ts)]  # an empty index list is a syntax error
        while ts.peek()[1] == ",":
            ts.next()
            indices.append(_parse_int(ts))
        ts.expect("]")
        ts.expect("(")
        arg = _parse_term(ts)
        ts.expect(")")
        return Project(tuple(indices), arg)
    if value == "join":
        ts.expect("[")
        conds = []
        if ts.peek()[1] != "]":
            conds.append(_parse_jcond(ts))
            while ts.peek()[1] == ",":
                ts.next()
                conds.append(_parse_jcond(ts))
        ts.expect("]")
        ts.expect("(")
        left = _parse_term(ts)
        ts.expect(",")
        right = _parse_term(ts)
        ts.expect(")")
        return Join(tuple(conds), left, right)
    if value == "union":
        ts.expect("(")
        left = _parse_term(ts)
        ts.expect(",")
        right = _parse_term(ts)
        ts.expect(")")
        return UnionTerm(left, right)
    if value in _NON_REL_WORDS:
        raise ParseError(f"{value!r} is a reserved word, not a relation", line, col)
    return RelRef(value)


def parse_term(text: str) -> QueryTerm:
    """Parse a term; raises :class:`ParseError` with line/column on bad syntax."""
    ts = _Tokens(text)
    term = _parse_term(ts)
    kind, value, line, col = ts.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input {value!r}", line, col)
    return term


# ---------------------------------------------------------------------------
# Static checking
# ---------------------------------------------------------------------------


def _relations_used(t: QueryTerm, acc: set) -> set:
    if isinstance(t, RelRef):
        acc.add(t.name)
    elif isinstance(t, (Select, Project)):
        _relations_used(t.arg, acc)
    elif isinstance(t, (Join, UnionTerm)):
        _relations_used(t.left, acc)
        _relations_used(t.right, acc)
    return acc


def _static_arity(t: QueryTerm, inst: Instance) -> int:
    if isinstance(t, BottomTerm):
        return 0
    if isinstance(t, RelRef):
        if t.name not in inst.relation_arities:
            raise UnknownRelation(f"unknown relation {t.name!r} in instance {inst.name!r}")
        return inst.relation_arities[t.name]
    if isinstance(t, Select):
        n = _static_arity(t.arg, inst)
        for c in t.conds:
            if not 1 <= c.index <= n:
                raise IndexOutOfRange(f"selection index {c.index} out of range 1..{n}")
            if isinstance(c.value, int) and not 1 <= c.value <= n:
                raise IndexOutOfRange(f"selection index {c.value} out of range 1..{n}")
        return n
    if isinstance(t, Project):
        n = _static_arity(t.arg, inst)
        for i in t.indices:
            if not 1 <= i <= n:
                raise IndexOutOfRange(f"projection index {i} out of range 1..{n}")
        return len(t.indices)
    if isinstance(t, Join):
        n1 = _static_arity(t.left, inst)
        n2 = _static_arity(t.right, inst)
        for jc in t.conds:
            if not 1 <= jc.left <= n1:
                raise IndexOutOfRange(f"join index l{jc.left} out of range 1..{n1}")
            if not 1 <= jc.right <= n2:
                raise IndexOutOfRange(f"join index r{jc.right} out of range 1..{n2}")
        return n1 + n2
    if isinstance(t, UnionTerm):
        n1 = _static_arity(t.left, inst)
        n2 = _static_arity(t.right, inst)
        if n1 != n2:
            raise UnionArityMismatch(f"union of arity {n1} with arity {n2}")
        return n1
    raise TypeError(f"not a query term: {t!r}")


def check_term(t: QueryTerm, inst: Instance) -> int:
    """Validate ``t`` against ``inst`` and return its arity.

    On a component-partitioned instance a term may only reference relations
    from a single component (:class:`CrossComponentTerm` otherwise).
    """
    arity = _static_arity(t, inst)
    if inst.components is not None:
        used = _relations_used(t, set())
        touched = set()
        for i, group in enumerate(inst.components):
            hit = used & group
            if hit:
                touched.add(i)
            used -= group
        if len(touched) > 1:
            raise CrossComponentTerm(
                "term mixes relations from separate components: " + print_term(t)
            )
    return arity


# ---------------------------------------------------------------------------
# Evaluation (value level, over row sets)
# ---------------------------------------------------------------------------


def _select_rows(rows, conds) -> frozenset:
    out = []
    for r in rows:
        ok = True
        for c in conds:
            if isinstance(c.value, int):
                if r[c.index - 1] != r[c.value - 1]:
                    ok = False
                    break
            elif r[c.index - 1] != c.value:
                ok = False
                break
        if ok:
            out.append(r)
    return frozenset(out)


def _eval_rows(t: QueryTerm, inst: Instance):
    """Evaluate to (arity, frozenset of rows); arity is the static one."""
    if isinstance(t, BottomTerm):
        return 0, frozenset()
    if isinstance(t, RelRef):
        return inst.relation_arities[t.name], inst.relations[t.name].row_set
    if isinstance(t, Select):
        n, rows = _eval_rows(t.arg, inst)
        return n, _select_rows(rows, t.conds)
    if isinstance(t, Project):
        _, rows = _eval_rows(t.arg, inst)
        picked = frozenset(tuple(r[i - 1] for i in t.indices) for r in rows)
        return len(t.indices), picked
    if isinstance(t, Join):
        n1, lrows = _eval_rows(t.left, inst)
        n2, rrows = _eval_rows(t.right, inst)
        out = []
        for lr in lrows:
            for rr in rrows:
                if all(lr[jc.left - 1] == rr[jc.right - 1] for jc in t.conds):
                    out.append(lr + rr)
        return n1 + n2, frozenset(out)
    if isinstance(t, UnionTerm):
        n, lrows = _eval_rows(t.left, inst)
        _, rrows = _eval_rows(t.right, inst)
        return n, lrows | rrows
    raise TypeError(f"not a query term: {t!r}")


def eval_term(t: QueryTerm, inst: Instance) -> View:
    """Evaluate ``t`` over ``inst`` to a canonical :class:`View`.

    Checks the term first; an empty result canonicalizes to :data:`Bottom`.
    """
    check_term(t, inst)
    arity, rows = _eval_rows(t, inst)
    if not rows:
        return Bottom
    return canonicalize_view(arity, rows)


# Value-level operator application on views.  These absorb the empty view the
# way evaluation does (anything positional over no tuples is no tuples); the
# equation solver and the tests share them with ``eval_term``.


def apply_select(view: View, conds: Iterable) -> View:
    if view.is_bottom:
        return Bottom
    rows = _select_rows(view.row_set, tuple(conds))
    return canonicalize_view(view.arity, rows) if rows else Bottom


def apply_project(view: View, indices: Iterable) -> View:
    indices = tuple(indices)
    if view.is_bottom:
        return Bottom
    rows = frozenset(tuple(r[i - 1] for i in indices) for r in view.row_set)
    return canonicalize_view(len(indices), rows)


def apply_join(left: View, right: View, conds: Iterable) -> View:
    if left.is_bottom or right.is_bottom:
        return Bottom
    conds = tuple(conds)
    out = [
        lr + rr
        for lr in left.row_set
        for rr in right.row_set
        if all(lr[jc.left - 1] == rr[jc.right - 1] for jc in conds)
    ]
    if not out:
        return Bottom
    return canonicalize_view(left.arity + right.arity, out)


def apply_union(left: View, right: View) -> View:
    if left.is_bottom:
        return right
    if right.is_bottom:
        return left
    return canonicalize_view(left.arity, left.row_set | right.row_set)


# ---------------------------------------------------------------------------
# Canonical term enumeration
# ---------------------------------------------------------------------------
#
# The raw grammar admits infinitely many terms of any given value (conditions
# may repeat), so enumeration fixes a canonical family of operator
# applications:
#
#   * select with exactly one condition — position = active-domain constant,
#     or position = later position (i < j);
#   * project with any index list of length <= max_arity (repeats allowed);
#   * join with any duplicate-free sorted condition list (possibly empty);
#   * union of any two same-arity terms.
#
# Results are deduplicated by printed form and ordered by (size, print).


def _canonical_selects(n: int, consts):
    for i in range(1, n + 1):
        for c in consts:
            yield (Cond(i, c),)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            yield (Cond(i, j),)


def _canonical_projects(n: int, max_arity: int):
    for k in range(1, max_arity + 1):
        yield from itertools.product(range(1, n + 1), repeat=k)


def _canonical_jcond_lists(n1: int, n2: int):
    pairs = [JCond(i, j) for i in range(1, n1 + 1) for j in range(1, n2 + 1)]
    for k in range(len(pairs) + 1):
        yield from itertools.combinations(pairs, k)


def enumerate_terms(inst: Instance, max_depth: int, max_arity: int) -> list:
    """All canonical terms over ``inst`` up to ``max_depth`` and ``max_arity``.

    Deterministic: the result is sorted by (term size, printed form).
    Raises :class:`BoundTooSmall` if some base relation is wider than
    ``max_arity``.
    """
    for rname, arity in inst.relation_arities.items():
        if arity > max_arity:
            raise BoundTooSmall(
                f"relation {rname!r} has arity {arity} > max_arity {max_arity}"
            )
    if max_depth < 1:
        return []

    consts = sorted(active_domain(inst))
    seen: dict = {}  # print -> (term, arity)

    def admit(term: QueryTerm, arity: int) -> None:
        if arity > max_arity:
            return
        if inst.components is not None:
            try:
                check_term(term, inst)
            except CrossComponentTerm:
                return
        p = print_term(term)
        if p not in seen:
            seen[p] = (term, arity)

    layer: list = []
    for rname in sorted(inst.relation_arities):
        t = RelRef(rname)
        arity = inst.relation_arities[rname]
        admit(t, arity)
        layer.append((t, arity))

    known: list = list(layer)
    for _depth in range(2, max_depth + 1):
        fresh: list = []

        def admit_new(term: QueryTerm, arity: int) -> None:
            if arity > max_arity:
                return
            p = print_term(term)
            if p not in seen:
                admit(term, arity)
                if p in seen:
                    fresh.append((term, arity))

        for t, n in known:
            for conds in _canonical_selects(n, consts):
                admit_new(Select(conds, t), n)
            for idxs in _canonical_projects(n, max_arity):
                admit_new(Project(idxs, t), len(idxs))
        for t1, n1 in known:
            for t2, n2 in known:
                if n1 + n2 <= max_arity:
                    for jconds in _canonical_jcond_lists(n1, n2):
                        admit_new(Join(jconds, t1, t2), n1 + n2)
                if n1 == n2:
                    admit_new(UnionTerm(t1, t2), n1)
        if not fresh:
            break
        known.extend(fresh)

    result = [term for term, _ in seen.values()]
    result.sort(key=lambda t: (term_size(t), print_term(t)))
    return result
