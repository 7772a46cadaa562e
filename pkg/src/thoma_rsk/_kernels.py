"""Compiled hot loops: batched RSK shapes on encoded words, reflecting walks.

Words arrive encoded as float keys (see ``LinearOrder.key``): discrete
letters sit on even integers outside (-1, 1), points of G inside it. Only
discrete letters can be in L_e; their flag is ``weak_slot[key / 2 + offset]``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _bisect(row, length, key, right):
    lo, hi = 0, length
    if right:
        while lo < hi:
            mid = (lo + hi) >> 1
            if key < row[mid]:
                hi = mid
            else:
                lo = mid + 1
    else:
        while lo < hi:
            mid = (lo + hi) >> 1
            if row[mid] < key:
                lo = mid + 1
            else:
                hi = mid
    return lo


@njit(cache=True)
def _grow(tab, rows_needed, cols_needed):
    r, c = tab.shape
    nr, nc = r, c
    while nr < rows_needed:
        nr *= 2
    while nc < cols_needed:
        nc *= 2
    new = np.empty((nr, nc), dtype=np.float64)
    new[:r, :c] = tab
    return new


@njit(cache=True)
def _slot(k, offset):
    """Segment index of a discrete key, -1 for a point of G."""
    if -1.0 < k < 1.0:
        return -1
    return int(k) // 2 + offset


@njit(cache=True)
def _first_zero(tree, P, r):
    """Smallest leaf index >= r holding 0 in a min segment tree with P leaves."""
    v = P + r
    if tree[v] == 0:
        return r
    while True:
        if v & 1 == 0 and tree[v + 1] == 0:
            v += 1
            break
        v >>= 1
        if v <= 1:
            return P
    while v < P:
        v = 2 * v if tree[2 * v] == 0 else 2 * v + 1
    return v - P


@njit(cache=True)
def _set_leaf(tree, P, j, val):
    v = P + j
    tree[v] = val
    v >>= 1
    while v >= 1:
        m = min(tree[2 * v], tree[2 * v + 1])
        if tree[v] == m:
            break
        tree[v] = m
        v >>= 1


@njit(cache=True)
def _shape_one(keys, n, weak_slot, lo_index, offset, tab, rowlen, trees, P):
    """Insert keys[:n]; fills rowlen and returns (number of rows, table).

    A letter of L_o occurs at most once per row, and moving it into a row
    that already holds it changes nothing, so its bump path jumps straight
    to the next row without it. ``trees[lo_index[slot]]`` marks those rows.
    """
    trees[:, :] = 0
    nrows = 0
    for t in range(n):
        k = keys[t]
        i = 0
        while True:
            s = _slot(k, offset)
            weak = False
            tr = -1
            if s >= 0:
                weak = weak_slot[s]
                tr = lo_index[s]
            if tr >= 0:
                i = _first_zero(trees[tr], P, i)
            if i == nrows:
                if i >= tab.shape[0]:
                    tab = _grow(tab, i + 1, 1)
                    new_len = np.zeros(tab.shape[0], dtype=np.int64)
                    new_len[: rowlen.shape[0]] = rowlen
                    rowlen = new_len
                tab[i, 0] = k
                rowlen[i] = 1
                nrows += 1
                if tr >= 0:
                    _set_leaf(trees[tr], P, i, 1)
                break
            L = rowlen[i]
            j = _bisect(tab[i], L, k, weak)
            if tr >= 0:
                _set_leaf(trees[tr], P, i, 1)
            if j == L:
                if L >= tab.shape[1]:
                    tab = _grow(tab, 1, L + 1)
                tab[i, L] = k
                rowlen[i] = L + 1
                break
            bumped = tab[i, j]
            tab[i, j] = k
            sb = _slot(bumped, offset)
            if sb >= 0 and lo_index[sb] >= 0:
                _set_leaf(trees[lo_index[sb]], P, i, 0)
            k = bumped
            i += 1
    return nrows, tab, rowlen


@njit(cache=True)
def shapes_batch(keys, lengths, weak_slot, offset, nrows_out, ncols_out):
    """Row lengths (first nrows_out) and column lengths (first ncols_out) per trial."""
    T = keys.shape[0]
    rows = np.zeros((T, nrows_out), dtype=np.int64)
    cols = np.zeros((T, ncols_out), dtype=np.int64)
    nrows_all = np.zeros(T, dtype=np.int64)
    tab = np.empty((64, 64), dtype=np.float64)
    rowlen = np.zeros(64, dtype=np.int64)
    S = weak_slot.shape[0]
    lo_index = np.full(S + 1, -1, dtype=np.int64)
    nlo = 0
    for s in range(S):
        if not weak_slot[s] and s != offset:
            lo_index[s] = nlo
            nlo += 1
    width = keys.shape[1] if keys.ndim == 2 else 0
    P = 2
    while P < width + 2:
        P *= 2
    trees = np.zeros((max(nlo, 1), 2 * P), dtype=np.int8)
    for s in range(T):
        nr, tab, rowlen = _shape_one(keys[s], lengths[s], weak_slot, lo_index, offset, tab, rowlen, trees, P)
        nrows_all[s] = nr
        for i in range(min(nr, nrows_out)):
            rows[s, i] = rowlen[i]
        for i in range(nr):
            L = rowlen[i]
            for j in range(min(L, ncols_out)):
                cols[s, j] += 1
    return rows, cols, nrows_all


@njit(cache=True)
def walk_batch(uniforms, q1, q3):
    """Final positions of reflecting walks; one uniform per step, right if u < q1, left if u >= 1 - q3."""
    T, n = uniforms.shape
    out = np.zeros(T, dtype=np.int64)
    left = 1.0 - q3
    for s in range(T):
        pos = 0
        for t in range(n):
            u = uniforms[s, t]
            if u < q1:
                pos += 1
            elif u >= left and pos > 0:
                pos -= 1
        out[s] = pos
    return out
