"""Compiled union-find kernels for large simulations.

Each kernel walks a pre-drawn array of uniform vertex proposals and
applies one process rule, so all randomness stays in the caller and the
compiled path consumes exactly the same stream as the pure-Python
engine. State travels in a small int64 array (see STATE_* indices);
component sizes live in ``size`` and are only valid at root indices.

Importing this module is optional; callers fall back to the pure
engine when numba is unavailable.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

# state vector layout shared by all kernels
STATE_N1 = 0  # isolated vertices
STATE_C1 = 1  # largest component size
STATE_E1 = 2  # rounds where the first offered edge was chosen

_JIT = dict(cache=True, nogil=True)


@njit(inline="always", **_JIT)
def _find(parent, v):
    r = v
    while parent[r] != r:
        r = parent[r]
    # full path compression
    while parent[v] != r:
        nxt = parent[v]
        parent[v] = r
        v = nxt
    return r


@njit(inline="always", **_JIT)
def _union_roots(parent, size, state, ru, rv):
    # union by size, ties kept on the first argument's root
    a = size[ru]
    b = size[rv]
    if a >= b:
        parent[rv] = ru
        size[ru] = a + b
    else:
        parent[ru] = rv
        size[rv] = a + b
    if a + b > state[STATE_C1]:
        state[STATE_C1] = a + b
    if a == 1:
        state[STATE_N1] -= 1
    if b == 1:
        state[STATE_N1] -= 1


@njit(**_JIT)
def er_wr_chunk(parent, size, pairs, start, need, state):
    """Uniform edges with replacement; loops are not proposals and are skipped."""
    pos = start
    nrows = pairs.shape[0]
    done = 0
    while done < need and pos < nrows:
        u = pairs[pos, 0]
        v = pairs[pos, 1]
        pos += 1
        if u == v:
            continue
        done += 1
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        _union_roots(parent, size, state, ru, rv)
    return done, pos


@njit(inline="always", **_JIT)
def _table_add(table, key):
    """Insert key into an open-addressed set; return True when new."""
    mask = table.shape[0] - 1
    h = (key * np.int64(-7046029254386353131)) & mask
    while True:
        cur = table[h]
        if cur == -1:
            table[h] = key
            return True
        if cur == key:
            return False
        h = (h + 1) & mask


@njit(**_JIT)
def table_fill(table, keys):
    for i in range(keys.shape[0]):
        _table_add(table, keys[i])


@njit(**_JIT)
def er_norep_chunk(parent, size, pairs, start, need, state, table, n):
    """Uniform edges without replacement; present edges are never re-proposed."""
    pos = start
    nrows = pairs.shape[0]
    done = 0
    while done < need and pos < nrows:
        u = pairs[pos, 0]
        v = pairs[pos, 1]
        pos += 1
        if u == v:
            continue
        if u > v:
            u, v = v, u
        if not _table_add(table, u * n + v):
            continue
        done += 1
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        _union_roots(parent, size, state, ru, rv)
    return done, pos


@njit(**_JIT)
def bf_chunk(parent, size, quads, start, need, allow_loops, state):
    """Bounded-size rule: take the first edge iff both endpoints are isolated.

    With ``allow_loops`` every row is one round and a chosen loop is a
    no-op insertion; otherwise rows containing a loop are resampled
    (skipped without counting).
    """
    pos = start
    nrows = quads.shape[0]
    done = 0
    while done < need and pos < nrows:
        v1 = quads[pos, 0]
        w1 = quads[pos, 1]
        v2 = quads[pos, 2]
        w2 = quads[pos, 3]
        pos += 1
        if not allow_loops and (v1 == w1 or v2 == w2):
            continue
        done += 1
        if size[_find(parent, v1)] == 1 and size[_find(parent, w1)] == 1:
            u, v = v1, w1
            state[STATE_E1] += 1
        else:
            u, v = v2, w2
        if u == v:
            continue
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        _union_roots(parent, size, state, ru, rv)
    return done, pos


@njit(**_JIT)
def product_chunk(parent, size, quads, start, need, allow_loops, state):
    """Contrast rule: insert the offered edge with the larger size product."""
    pos = start
    nrows = quads.shape[0]
    done = 0
    while done < need and pos < nrows:
        v1 = quads[pos, 0]
        w1 = quads[pos, 1]
        v2 = quads[pos, 2]
        w2 = quads[pos, 3]
        pos += 1
        if not allow_loops and (v1 == w1 or v2 == w2):
            continue
        done += 1
        p1 = size[_find(parent, v1)] * size[_find(parent, w1)]
        p2 = size[_find(parent, v2)] * size[_find(parent, w2)]
        if p1 >= p2:
            u, v = v1, w1
            state[STATE_E1] += 1
        else:
            u, v = v2, w2
        if u == v:
            continue
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        _union_roots(parent, size, state, ru, rv)
    return done, pos


@njit(**_JIT)
def compress_all(parent):
    for v in range(parent.shape[0]):
        _find(parent, v)
