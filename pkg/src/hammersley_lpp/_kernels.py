"""Compiled sweeps for the last-passage recursion.

Both kernels take points sorted by ``(x, t)`` and return, per point, the best
chain value ending there and the predecessor on the lowest such chain.  The
predecessor rule is: largest value, then smallest ``t``, then largest ``x``.
Points sharing an ``x`` are evaluated as a group before any of them is
inserted, so they never precede each other.  Values ``<= 0`` are never
offered as predecessors.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sweep_fenwick(x, t, w, qlen, rank):
    """Prefix-maximum tree over ``t``-rank.

    ``rank[k]`` is the position of point ``k`` in ``(t asc, x desc)`` order and
    ``qlen[k]`` the number of points with ``t`` strictly below ``t[k]``.
    """
    n = x.shape[0]
    # node = (value, -(rank + 1)); lexicographic max picks the lowest attainer
    tree = np.zeros((n + 1, 2))
    node_idx = np.full(n + 1, -1, np.int64)
    val = np.empty(n)
    pred = np.full(n, -1, np.int64)
    i = 0
    while i < n:
        j = i + 1
        while j < n and x[j] == x[i]:
            j += 1
        for k in range(i, j):
            r = qlen[k]
            bv = 0.0
            bkey = 0.0
            bi = -1
            while r > 0:
                v = tree[r, 0]
                if v > bv or (v == bv and bi >= 0 and tree[r, 1] > bkey):
                    bv = v
                    bkey = tree[r, 1]
                    bi = node_idx[r]
                r -= r & (-r)
            val[k] = w[k] + bv
            if bv > 0.0:
                pred[k] = bi
        for k in range(i, j):
            v = val[k]
            if v <= 0.0:
                continue
            key = -(rank[k] + 1.0)
            r = rank[k] + 1
            while r <= n:
                tv = tree[r, 0]
                if v > tv or (v == tv and key > tree[r, 1]):
                    tree[r, 0] = v
                    tree[r, 1] = key
                    node_idx[r] = k
                r += r & (-r)
        i = j
    return val, pred


@njit(cache=True, nogil=True)
def _lower_bound(a, m, value):
    lo = 0
    hi = m
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def sweep_staircase(x, t, w):
    """Dominance frontier: ``t`` and value both strictly increasing.

    With equal positive weights every insertion overwrites one slot, so this
    is patience sorting and runs in O(n log L).  For general weights inserts
    may shift the frontier; use :func:`sweep_fenwick` there.
    """
    n = x.shape[0]
    cap = 1024
    ft = np.empty(cap)
    fv = np.empty(cap)
    fi = np.empty(cap, np.int64)
    m = 0
    val = np.empty(n)
    pred = np.full(n, -1, np.int64)
    i = 0
    while i < n:
        j = i + 1
        while j < n and x[j] == x[i]:
            j += 1
        for k in range(i, j):
            pos = _lower_bound(ft, m, t[k])
            if pos > 0:
                val[k] = w[k] + fv[pos - 1]
                pred[k] = fi[pos - 1]
            else:
                val[k] = w[k]
        for k in range(i, j):
            v = val[k]
            if v <= 0.0:
                continue
            tk = t[k]
            pos = _lower_bound(ft, m, tk)
            if pos > 0 and fv[pos - 1] >= v:
                continue
            if pos < m and ft[pos] == tk and fv[pos] > v:
                continue
            end = pos
            while end < m and fv[end] <= v:
                end += 1
            removed = end - pos
            if removed == 0:
                if m == cap:
                    cap *= 2
                    nt = np.empty(cap)
                    nv = np.empty(cap)
                    ni = np.empty(cap, np.int64)
                    nt[:m] = ft[:m]
                    nv[:m] = fv[:m]
                    ni[:m] = fi[:m]
                    ft = nt
                    fv = nv
                    fi = ni
                for q in range(m, pos, -1):
                    ft[q] = ft[q - 1]
                    fv[q] = fv[q - 1]
                    fi[q] = fi[q - 1]
                m += 1
            elif removed > 1:
                shift = removed - 1
                for q in range(pos + 1, m - shift):
                    ft[q] = ft[q + shift]
                    fv[q] = fv[q + shift]
                    fi[q] = fi[q + shift]
                m -= shift
            ft[pos] = tk
            fv[pos] = v
            fi[pos] = k
        i = j
    return val, pred
