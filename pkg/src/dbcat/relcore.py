"""Constants, tuples, views, and database instances.

A *view* is a purely extensional object: an arity together with a finite set
of tuples of that arity.  The empty view is a single distinguished arity-less
object, ``Bottom``; there is one empty view, not one per arity.  An *instance*
is a named, ordered collection of relations, each holding a view, over a
declared finite domain of constants.

Views and constants are interned, so extensional equality is pointer
equality.  Tuples are plain Python tuples of :class:`DomainConst`; a view
stores its tuples sorted, which fixes a canonical iteration order everywhere
(reports, materialization, file output).
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import (
    ArityMismatch,
    ConstantOutsideDomain,
    DuplicateRelation,
    ParseError,
)

__all__ = [
    "DomainConst",
    "Row",
    "View",
    "Bottom",
    "Instance",
    "const",
    "canonicalize_view",
    "make_instance",
    "views_of",
    "active_domain",
    "same_extension",
    "parse_dbi",
    "format_dbi",
    "RESERVED_WORDS",
    "IMPOSSIBLE_CONST",
]

# Identifier shape shared by constants and relation names.  Constants may not
# look like integers (a bare integer in a selection condition denotes a
# position, so integer-shaped constants would be ambiguous there).
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")

# Words with a fixed meaning in the term / file grammars.
RESERVED_WORDS = frozenset(
    {"select", "project", "join", "union", "bottom", "rel", "domain", "relation"}
)

# Reserved constant used to witness the empty view: selecting on it can never
# match anything, because no instance may declare it.
IMPOSSIBLE_CONST = "_impossible_"


class DomainConst:
    """An interned domain constant, totally ordered by its symbol."""

    __slots__ = ("symbol", "_hash")

    def __init__(self, symbol: str):
        self.symbol = symbol
        self._hash = hash(symbol)

    def __repr__(self) -> str:
        return f"DomainConst({self.symbol!r})"

    def __str__(self) -> str:
        return self.symbol

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, DomainConst) and self.symbol == other.symbol

    def __lt__(self, other: "DomainConst") -> bool:
        return self.symbol < other.symbol

    def __le__(self, other: "DomainConst") -> bool:
        return self.symbol <= other.symbol

    def __gt__(self, other: "DomainConst") -> bool:
        return self.symbol > other.symbol

    def __ge__(self, other: "DomainConst") -> bool:
        return self.symbol >= other.symbol

    def __hash__(self) -> int:
        return self._hash


Row = tuple  # a tuple of DomainConst; arity is its length

_CONST_CACHE: dict[str, DomainConst] = {}


def const(symbol: Union[str, DomainConst]) -> DomainConst:
    """Intern ``symbol`` as a :class:`DomainConst`."""
    if isinstance(symbol, DomainConst):
        return symbol
    c = _CONST_CACHE.get(symbol)
    if c is None:
        c = _CONST_CACHE[symbol] = DomainConst(symbol)
    return c


class View:
    """An interned extensional view: an arity and a sorted tuple of rows.

    Do not construct directly; go through :func:`canonicalize_view` (or
    :data:`Bottom` for the empty view).
    """

    __slots__ = ("arity", "rows", "_hash", "_row_set")

    def __init__(self, arity: int, rows: tuple, _token: object = None):
        if _token is not _INTERN_TOKEN:
            raise TypeError("use canonicalize_view() to build views")
        self.arity = arity
        self.rows = rows  # sorted tuple of Row
        self._hash = hash((arity, rows))
        self._row_set: Optional[frozenset] = None

    @property
    def is_bottom(self) -> bool:
        return not self.rows

    @property
    def row_set(self) -> frozenset:
        rs = self._row_set
        if rs is None:
            rs = self._row_set = frozenset(self.rows)
        return rs

    def __iter__(self) -> Iterator[Row]:
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        # Interning makes identity the common case.
        if self is other:
            return True
        return (
            isinstance(other, View)
            and self.arity == other.arity
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.is_bottom:
            return "View(bottom)"
        shown = ";".join("(" + ",".join(c.symbol for c in row) + ")" for row in self.rows)
        return f"View({self.arity}, {shown})"

    def sort_key(self):
        """Canonical order: by arity, then by the sorted row list."""
        return (self.arity, tuple(tuple(c.symbol for c in row) for row in self.rows))


_INTERN_TOKEN = object()
_VIEW_CACHE: dict[tuple, View] = {}

#: The unique empty view.  It has no tuples and, by convention, arity 0.
Bottom = View(0, (), _token=_INTERN_TOKEN)
_VIEW_CACHE[(0, ())] = Bottom


def _intern_view(arity: int, rows: tuple) -> View:
    key = (arity, rows)
    v = _VIEW_CACHE.get(key)
    if v is None:
        v = _VIEW_CACHE[key] = View(arity, rows, _token=_INTERN_TOKEN)
    return v


def canonicalize_view(arity: int, raw: Iterable[Sequence]) -> View:
    """Build the canonical :class:`View` for ``raw`` tuples of ``arity``.

    Every tuple must have exactly ``arity`` entries (:class:`ArityMismatch`
    otherwise); entries are interned as constants.  An empty collection of
    tuples canonicalizes to :data:`Bottom`, whatever the arity.
    """
    if arity < 1:
        raise ArityMismatch(f"arity must be positive, got {arity}")
    rows = set()
    for t in raw:
        t = tuple(const(c) for c in t)
        if len(t) != arity:
            raise ArityMismatch(
                f"tuple {tuple(c.symbol for c in t)} has {len(t)} entries, expected {arity}"
            )
        rows.add(t)
    if not rows:
        return Bottom
    return _intern_view(arity, tuple(sorted(rows)))


def _check_name(name: str, what: str) -> str:
    if not _NAME_RE.match(name):
        raise ParseError(f"invalid {what} {name!r}: must be an identifier")
    if name in RESERVED_WORDS:
        raise ParseError(f"invalid {what} {name!r}: reserved word")
    return name


def _check_const_symbol(symbol: str) -> str:
    if not _NAME_RE.match(symbol):
        raise ParseError(
            f"invalid constant {symbol!r}: constants must be identifiers "
            f"(integer-shaped constants would clash with position indices)"
        )
    if symbol == IMPOSSIBLE_CONST or symbol in RESERVED_WORDS:
        raise ParseError(f"invalid constant {symbol!r}: reserved word")
    return symbol


class Instance:
    """A named database instance: an ordered map relation-name -> view.

    ``relation_arities`` keeps each relation's declared arity even when its
    view is empty (the empty view itself carries no arity).  ``components``
    is normally ``None``; separated-sum instances set it to a tuple of
    relation-name groups, and terms may not mix groups.

    Instances are immutable.  Equality is object identity; extensional
    comparison goes through :func:`same_extension` or the closure machinery.
    """

    __slots__ = (
        "name",
        "relations",
        "relation_arities",
        "declared_domain",
        "components",
        "_views_of",
        "_active",
        "_closure_cache",
        "_ext_index",
    )

    def __init__(
        self,
        name: str,
        relations: dict,
        relation_arities: dict,
        declared_domain: frozenset,
        components=None,
        *,
        _token: object = None,
    ):
        if _token is not _INTERN_TOKEN:
            raise TypeError("use make_instance() to build instances")
        self.name = name
        self.relations = relations
        self.relation_arities = relation_arities
        self.declared_domain = declared_domain
        self.components = components
        self._views_of: Optional[frozenset] = None
        self._active: Optional[frozenset] = None
        self._closure_cache: dict = {}
        self._ext_index: Optional[dict] = None

    @property
    def relation_names(self) -> tuple:
        return tuple(self.relations)

    def arity_of(self, name: str) -> int:
        return self.relation_arities[name]

    def extension_index(self) -> dict:
        """Map each non-empty relation view to one of its names (first wins)."""
        idx = self._ext_index
        if idx is None:
            idx = {}
            for rname, view in self.relations.items():
                if not view.is_bottom and view not in idx:
                    idx[view] = rname
            self._ext_index = idx
        return idx

    def component_of(self, relation: str) -> Optional[int]:
        if self.components is None:
            return None
        for i, group in enumerate(self.components):
            if relation in group:
                return i
        return None

    def __repr__(self) -> str:
        rels = ", ".join(f"{n}/{self.relation_arities[n]}" for n in self.relations)
        return f"Instance({self.name!r}: {rels or 'empty'})"


def _build_instance(
    name: str,
    relations: dict,
    relation_arities: dict,
    declared_domain: frozenset,
    components=None,
) -> Instance:
    """Trusted constructor: inputs already validated/canonical."""
    return Instance(
        name, relations, relation_arities, declared_domain, components, _token=_INTERN_TOKEN
    )


def make_instance(name: str, relations: Iterable, domain: Iterable) -> Instance:
    """Validate and build an instance.

    ``relations`` is an iterable of ``(relation_name, arity, tuples)``
    triples; ``domain`` the declared constants.  Raises
    :class:`DuplicateRelation` on repeated names and
    :class:`ConstantOutsideDomain` when a tuple uses an undeclared constant.
    """
    dom = frozenset(const(_check_const_symbol(str(c))) for c in domain)
    rels: dict = {}
    arities: dict = {}
    for rel_name, arity, rows in relations:
        _check_name(rel_name, "relation name")
        if rel_name in rels:
            raise DuplicateRelation(f"relation {rel_name!r} declared twice")
        view = canonicalize_view(arity, rows)
        for row in view:
            for c in row:
                if c not in dom:
                    raise ConstantOutsideDomain(
                        f"constant {c.symbol!r} in relation {rel_name!r} "
                        f"is not in the declared domain"
                    )
        rels[rel_name] = view
        arities[rel_name] = arity
    return _build_instance(name, rels, arities, dom)


def views_of(inst: Instance) -> frozenset:
    """The distinct relation extensions of ``inst`` plus :data:`Bottom`."""
    vs = inst._views_of
    if vs is None:
        vs = inst._views_of = frozenset(inst.relations.values()) | {Bottom}
    return vs


def active_domain(inst: Instance) -> frozenset:
    """The constants actually occurring in some tuple of ``inst``."""
    act = inst._active
    if act is None:
        found = set()
        for view in inst.relations.values():
            for row in view:
                found.update(row)
        act = inst._active = frozenset(found)
    return act


def same_extension(a: Instance, b: Instance) -> bool:
    """Do two instances present exactly the same set of views?"""
    return views_of(a) == views_of(b)


# ---------------------------------------------------------------------------
# Instance file format (.dbi)
#
#   # comment
#   domain a b c
#   relation r 2
#   a b
#   b c
#   relation s 1
#
# The domain line comes first; each relation block declares a name and arity
# followed by zero or more tuple lines (zero lines = the empty view).
# ---------------------------------------------------------------------------


def parse_dbi(text: str, name: str = "db") -> Instance:
    """Parse the instance file format; raises :class:`ParseError` on bad input."""
    domain: Optional[list] = None
    relations: list = []
    current: Optional[list] = None  # [name, arity, rows]

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "domain":
            if domain is not None:
                raise ParseError("second domain line", lineno, 1)
            domain = words[1:]
        elif words[0] == "relation":
            if domain is None:
                raise ParseError("the domain line must come first", lineno, 1)
            if len(words) != 3:
                raise ParseError("expected: relation <name> <arity>", lineno, 1)
            try:
                arity = int(words[2])
            except ValueError:
                raise ParseError(f"bad arity {words[2]!r}", lineno, 1) from None
            if current is not None:
                relations.append(tuple(current))
            current = [words[1], arity, []]
        else:
            if current is None:
                raise ParseError("tuple line outside a relation block", lineno, 1)
            current[2].append(tuple(words))
    if current is not None:
        relations.append(tuple(current))
    if domain is None:
        raise ParseError("missing domain line", 1, 1)
    return make_instance(name, relations, domain)


def format_dbi(inst: Instance) -> str:
    """Serialize an instance to the file format (canonical tuple order)."""
    out = [("domain " + " ".join(sorted(c.symbol for c in inst.declared_domain))).rstrip()]
    for rname, view in inst.relations.items():
        out.append(f"relation {rname} {inst.relation_arities[rname]}")
        for row in view:
            out.append(" ".join(c.symbol for c in row))
    return "\n".join(out) + "\n"
