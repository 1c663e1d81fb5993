# distutils: language = c++
"""Compiled saturation kernel.

Same contract as ``_pure`` — same candidates in the same order — restricted
to mask spaces of at most 64 bits (the orchestrator checks that before
picking this kernel).  Hot loops run on C integers with C++ hash sets.
"""

from libc.stdint cimport int64_t, uint64_t
from libcpp.unordered_set cimport unordered_set
from libcpp.vector cimport vector

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

KERNEL_NAME = "compiled"
MAX_BITS = 64


cdef class KnownSet:
    """Per-arity sets of already-seen view masks."""

    cdef vector[unordered_set[uint64_t]] sets

    def __init__(self, int max_arity):
        self.sets.resize(max_arity + 1)

    def has(self, int arity, mask) -> bool:
        return self.sets[arity].count(<uint64_t> mask) > 0

    def add(self, int arity, mask):
        self.sets[arity].insert(<uint64_t> mask)

    def size(self) -> int:
        cdef size_t total = 0
        cdef size_t i
        for i in range(self.sets.size()):
            total += self.sets[i].size()
        return total


def fire_unary(arities, masks, sel_tables, proj_tables, KnownSet known):
    cdef Py_ssize_t nf = len(masks)
    cdef int max_ar = len(sel_tables) - 1

    cdef vector[vector[uint64_t]] selv
    cdef vector[vector[int]] projres
    cdef vector[vector[vector[int64_t]]] projmap
    selv.resize(max_ar + 1)
    projres.resize(max_ar + 1)
    projmap.resize(max_ar + 1)
    cdef int n
    for n in range(1, max_ar + 1):
        for cm in sel_tables[n]:
            selv[n].push_back(<uint64_t> cm)
        for ra, dstmap in proj_tables[n]:
            projres[n].push_back(<int> ra)
            projmap[n].push_back(<vector[int64_t]> dstmap)

    cdef vector[int] fa
    cdef vector[uint64_t] fm
    for pos in range(nf):
        fa.push_back(<int> arities[pos])
        fm.push_back(<uint64_t> masks[pos])

    out = []
    cdef Py_ssize_t pos_i, pid
    cdef uint64_t m, mm, r
    cdef int b, ra_c
    for pos_i in range(nf):
        n = fa[pos_i]
        m = fm[pos_i]
        for pid in range(<Py_ssize_t> selv[n].size()):
            r = m & selv[n][pid]
            if r != 0 and known.sets[n].count(r) == 0:
                out.append((n, r, 0, pid, pos_i))
        for pid in range(<Py_ssize_t> projres[n].size()):
            ra_c = projres[n][pid]
            r = 0
            mm = m
            while mm:
                b = __builtin_ctzll(mm)
                r |= (<uint64_t> 1) << (<uint64_t> projmap[n][pid][b])
                mm &= mm - 1
            if known.sets[ra_c].count(r) == 0:
                out.append((ra_c, r, 1, pid, pos_i))
    return out


def fire_joins(int res_arity, xm, ym, stride, KnownSet known):
    cdef vector[uint64_t] xs, ys
    for v in xm:
        xs.push_back(<uint64_t> v)
    for v in ym:
        ys.push_back(<uint64_t> v)
    cdef uint64_t st = <uint64_t> stride

    out = []
    cdef Py_ssize_t i, j
    cdef uint64_t mx, my, r, base
    cdef int bx, by
    for i in range(<Py_ssize_t> xs.size()):
        for j in range(<Py_ssize_t> ys.size()):
            r = 0
            mx = xs[i]
            while mx:
                bx = __builtin_ctzll(mx)
                base = (<uint64_t> bx) * st
                my = ys[j]
                while my:
                    by = __builtin_ctzll(my)
                    r |= (<uint64_t> 1) << (base + <uint64_t> by)
                    my &= my - 1
                mx &= mx - 1
            if known.sets[res_arity].count(r) == 0:
                out.append((r, i, j))
    return out


def union_close(int arity, gens, KnownSet known, budget):
    cdef unordered_set[uint64_t] family
    cdef vector[uint64_t] ordered
    cdef int64_t limit = <int64_t> budget if budget < 2**62 else <int64_t> 2**62
    cdef int64_t count = 0
    records = []
    cdef uint64_t g, w
    cdef size_t idx, snapshot
    for g_py in gens:
        g = <uint64_t> g_py
        if family.count(g):
            continue
        snapshot = ordered.size()
        family.insert(g)
        ordered.push_back(g)
        for idx in range(snapshot):
            w = ordered[idx] | g
            if family.count(w):
                continue
            family.insert(w)
            ordered.push_back(w)
            if known.sets[arity].count(w) == 0:
                known.sets[arity].insert(w)
                count += 1
                records.append((w, ordered[idx], g))
                if count > limit:
                    return records, True
    return records, False
