"""Pure-Python saturation kernel.

Views are bitmasks over the tuple space of a fixed domain: a tuple of arity
``n`` over ``d`` constants is a mixed-radix number (first column most
significant), and a view of arity ``n`` is an integer with one bit per
present tuple.  Python's big integers make this work for any ``d ** n``.

The compiled kernel in ``_speedups`` implements the same four entry points
with the same observable behaviour (same candidates, same order) for mask
spaces that fit in 64 bits; the orchestration layer picks one per run.
Candidate emission order is part of the contract — parity tests compare the
two kernels record for record.
"""

from __future__ import annotations

KERNEL_NAME = "pure"
MAX_BITS = None  # unbounded


class KnownSet:
    """Per-arity sets of already-seen view masks."""

    __slots__ = ("sets",)

    def __init__(self, max_arity: int):
        self.sets = [set() for _ in range(max_arity + 1)]

    def has(self, arity: int, mask: int) -> bool:
        return mask in self.sets[arity]

    def add(self, arity: int, mask: int) -> None:
        self.sets[arity].add(mask)

    def size(self) -> int:
        return sum(len(s) for s in self.sets)


def fire_unary(arities, masks, sel_tables, proj_tables, known):
    """Apply every canonical select/project to each frontier view.

    ``sel_tables[n]`` is a list of condition masks for arity ``n``;
    ``proj_tables[n]`` a list of ``(result_arity, dstmap)`` where ``dstmap``
    maps source bit index to target bit index.  Emits
    ``(res_arity, res_mask, opcode, param_pos, parent_pos)`` for every
    application whose nonempty result is not already known (opcode 0 =
    select, 1 = project).
    """
    out = []
    for pos in range(len(masks)):
        n = arities[pos]
        m = masks[pos]
        for pid, cm in enumerate(sel_tables[n]):
            r = m & cm
            if r and not known.has(n, r):
                out.append((n, r, 0, pid, pos))
        for pid, (ra, dstmap) in enumerate(proj_tables[n]):
            r = 0
            mm = m
            while mm:
                b = (mm & -mm).bit_length() - 1
                r |= 1 << dstmap[b]
                mm &= mm - 1
            if not known.has(ra, r):
                out.append((ra, r, 1, pid, pos))
    return out


def fire_joins(res_arity, xm, ym, stride, known):
    """Cartesian-concatenate every x-view with every y-view.

    All x-views share one arity and all y-views another; their sum is
    ``res_arity`` and ``stride`` is ``d ** arity(y)``: the concatenation of
    tuple index ``i`` with tuple index ``j`` has index ``i * stride + j``.
    Emits ``(res_mask, xpos, ypos)`` for results not already known.
    """
    out = []
    for i in range(len(xm)):
        for j in range(len(ym)):
            r = 0
            mx = xm[i]
            while mx:
                bx = (mx & -mx).bit_length() - 1
                base = bx * stride
                my = ym[j]
                while my:
                    by = (my & -my).bit_length() - 1
                    r |= 1 << (base + by)
                    my &= my - 1
                mx &= mx - 1
            if not known.has(res_arity, r):
                out.append((r, i, j))
    return out


def union_close(arity, gens, known, budget):
    """Close ``gens`` (sorted by (popcount, value)) under pairwise union.

    Maintains the invariant that the working family is union-closed after
    each generator: unioning one new generator against a snapshot of the
    family is enough, because any union involving two members added during
    the same pass decomposes into earlier members.  A generator already in
    the family is skipped outright — it cannot enlarge a union-closed set.

    New masks are added to ``known`` and reported as ``(mask, left_mask,
    gen_mask)`` in creation order; masks that were already known still join
    the family but produce no record.  Returns ``(records, overflowed)``
    where ``overflowed`` signals that ``budget`` new records was not enough.
    """
    family = set()
    ordered = []
    records = []
    for g in gens:
        if g in family:
            continue
        snapshot = len(ordered)
        family.add(g)
        ordered.append(g)
        for idx in range(snapshot):
            w = ordered[idx] | g
            if w in family:
                continue
            family.add(w)
            ordered.append(w)
            if not known.has(arity, w):
                known.add(arity, w)
                records.append((w, ordered[idx], g))
                if len(records) > budget:
                    return records, True
    return records, False
