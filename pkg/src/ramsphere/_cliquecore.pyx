# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled maximum-clique kernel on packed uint64 bitsets.

Mirrors ``_cliquepy.solve`` operation for operation (greedy-coloring bound,
lowest-bit tie-breaking), so both backends produce identical results. The
complement relation is applied per access and never materialized.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

import numpy as np

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil

ctypedef unsigned long long u64


cdef struct SearchState:
    int n
    int nwords
    int complement
    int best_size
    int want
    u64 *adj          # n * nwords
    u64 *full_mask    # nwords
    u64 *pool         # (n + 2) * nwords scratch for candidate sets
    int *best         # n
    int *stack_r      # n
    int rsize
    int *order        # (n + 1) * n coloring scratch
    int *colors       # (n + 1) * n


cdef inline void _neighbors(SearchState *st, int v, u64 *out) noexcept nogil:
    cdef int w
    cdef u64 *row = st.adj + v * st.nwords
    if st.complement:
        for w in range(st.nwords):
            out[w] = (row[w] ^ st.full_mask[w])
        out[v >> 6] &= ~((<u64>1) << (v & 63))
    else:
        for w in range(st.nwords):
            out[w] = row[w]


cdef int _expand(SearchState *st, u64 *pset, int depth) noexcept nogil:
    """Returns 1 when the cap was reached and the search should unwind."""
    cdef int nwords = st.nwords
    cdef u64 *remaining = st.pool + (st.n) * nwords      # shared scratch
    cdef u64 *cand = st.pool + (st.n + 1) * nwords
    cdef u64 *nbr = st.pool + depth * nwords
    cdef int *order = st.order + depth * st.n
    cdef int *colors = st.colors + depth * st.n
    cdef int count = 0, color = 0
    cdef int w, v, i, base
    cdef u64 word

    memcpy(remaining, pset, nwords * sizeof(u64))
    while True:
        # find any remaining vertex
        v = -1
        for w in range(nwords):
            if remaining[w] != 0:
                v = 0
                break
        if v < 0:
            break
        color += 1
        memcpy(cand, remaining, nwords * sizeof(u64))
        while True:
            v = -1
            for w in range(nwords):
                word = cand[w]
                if word != 0:
                    v = (w << 6) + __builtin_ctzll(word)
                    break
            if v < 0:
                break
            order[count] = v
            colors[count] = color
            count += 1
            remaining[v >> 6] &= ~((<u64>1) << (v & 63))
            _neighbors(st, v, nbr)
            for w in range(nwords):
                cand[w] &= ~nbr[w]
            cand[v >> 6] &= ~((<u64>1) << (v & 63))

    cdef u64 *sub
    cdef int has_sub
    for i in range(count - 1, -1, -1):
        if st.rsize + colors[i] <= st.best_size:
            return 0
        v = order[i]
        st.stack_r[st.rsize] = v
        st.rsize += 1
        if st.rsize > st.best_size:
            st.best_size = st.rsize
            memcpy(st.best, st.stack_r, st.rsize * sizeof(int))
            if st.best_size >= st.want:
                st.rsize -= 1
                return 1
        _neighbors(st, v, nbr)
        sub = st.pool + depth * nwords  # reuse nbr buffer as the child set
        has_sub = 0
        for w in range(nwords):
            sub[w] = nbr[w] & pset[w]
            if sub[w] != 0:
                has_sub = 1
        if has_sub:
            if _expand(st, sub, depth + 1):
                st.rsize -= 1
                return 1
        st.rsize -= 1
        pset[v >> 6] &= ~((<u64>1) << (v & 63))
    return 0


def solve(object words, int n, int cap, bint complement):
    """Maximum clique of the packed-bitset graph (or its complement).

    ``words`` is a C-contiguous (n, ceil(n/64)) uint64 array; ``cap`` <= 0
    requests an exact search. Returns (size, sorted witness list).
    """
    if n == 0:
        return 0, []
    cdef u64[:, ::1] wview = words
    cdef int nwords = wview.shape[1]
    cdef SearchState st
    cdef int i, w
    st.n = n
    st.nwords = nwords
    st.complement = 1 if complement else 0
    st.best_size = 0
    st.want = cap if cap > 0 else n + 1
    st.rsize = 0
    st.adj = <u64 *>malloc(n * nwords * sizeof(u64))
    st.full_mask = <u64 *>malloc(nwords * sizeof(u64))
    st.pool = <u64 *>malloc((n + 2) * nwords * sizeof(u64))
    st.best = <int *>malloc(n * sizeof(int))
    st.stack_r = <int *>malloc(n * sizeof(int))
    st.order = <int *>malloc((n + 1) * n * sizeof(int))
    st.colors = <int *>malloc((n + 1) * n * sizeof(int))
    cdef u64 *root = NULL
    if (st.adj == NULL or st.full_mask == NULL or st.pool == NULL or
            st.best == NULL or st.stack_r == NULL or st.order == NULL or st.colors == NULL):
        _free_state(&st)
        raise MemoryError("clique kernel allocation failed")
    try:
        for i in range(n):
            for w in range(nwords):
                st.adj[i * nwords + w] = wview[i, w]
        for w in range(nwords):
            st.full_mask[w] = 0
        for i in range(n):
            st.full_mask[i >> 6] |= (<u64>1) << (i & 63)
        root = <u64 *>malloc(nwords * sizeof(u64))
        if root == NULL:
            raise MemoryError("clique kernel allocation failed")
        memcpy(root, st.full_mask, nwords * sizeof(u64))
        with nogil:
            _expand(&st, root, 0)
        out = sorted(st.best[i] for i in range(st.best_size))
        return st.best_size, out
    finally:
        if root != NULL:
            free(root)
        _free_state(&st)


cdef void _free_state(SearchState *st) noexcept:
    if st.adj != NULL:
        free(st.adj)
    if st.full_mask != NULL:
        free(st.full_mask)
    if st.pool != NULL:
        free(st.pool)
    if st.best != NULL:
        free(st.best)
    if st.stack_r != NULL:
        free(st.stack_r)
    if st.order != NULL:
        free(st.order)
    if st.colors != NULL:
        free(st.colors)
