"""Numba-compiled inner loops for graph sparsification and Louvain sweeps.

Kept separate so the rest of the package stays plain numpy. All kernels are
deterministic given their inputs; randomness (visit order) is injected by
the caller as explicit permutation arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def kruskal_select(order, iu, ju, n_nodes):
    """Indices (into the condensed pair list) of the MST edges.

    ``order`` ranks condensed pair indices by ascending distance; ties must
    already be broken by the caller (stable sort over the row-major upper
    triangle gives (i, j) lexicographic order).
    """
    parent = np.arange(n_nodes)
    out = np.empty(n_nodes - 1, dtype=np.int64)
    count = 0
    for e in range(order.shape[0]):
        idx = order[e]
        ri = iu[idx]
        while parent[ri] != ri:
            parent[ri] = parent[parent[ri]]
            ri = parent[ri]
        rj = ju[idx]
        while parent[rj] != rj:
            parent[rj] = parent[parent[rj]]
            rj = parent[rj]
        if ri != rj:
            parent[ri] = rj
            out[count] = idx
            count += 1
            if count == n_nodes - 1:
                break
    return out[:count]


@njit(cache=True, nogil=True)
def louvain_sweep(
    indptr,
    indices,
    data,
    t,
    pi,
    comm,
    comm_pi,
    comm_size,
    free_ids,
    free_top,
    order,
    w_buf,
    seen,
    touched,
    stamp,
    tol,
):
    """One Louvain pass over ``order`` on a symmetric sparse coupling matrix.

    ``data`` holds the off-diagonal coupling weights (self-loops are skipped;
    they move with their node and cancel in every gain). A node may move to a
    neighboring community or break out into a freed community slot. A move is
    taken only when it improves the quality by more than ``tol``. Returns
    (n_moves, free_top, stamp).
    """
    n_moves = 0
    for oi in range(order.shape[0]):
        u = order[oi]
        a = comm[u]
        pi_u = pi[u]
        stamp += 1
        tc = 0
        for p in range(indptr[u], indptr[u + 1]):
            j = indices[p]
            if j == u:
                continue
            c = comm[j]
            if seen[c] != stamp:
                seen[c] = stamp
                w_buf[c] = 0.0
                touched[tc] = c
                tc += 1
            w_buf[c] += data[p]
        w_ua = w_buf[a] if seen[a] == stamp else 0.0
        base = t * w_ua - pi_u * (comm_pi[a] - pi_u)

        best_delta = tol
        best_c = a
        for q in range(tc):
            c = touched[q]
            if c == a:
                continue
            delta = 2.0 * (t * w_buf[c] - pi_u * comm_pi[c] - base)
            if delta > best_delta:
                best_delta = delta
                best_c = c
        isolate = False
        if comm_size[a] > 1 and free_top > 0:
            delta = -2.0 * base
            if delta > best_delta:
                best_delta = delta
                isolate = True

        if isolate:
            free_top -= 1
            best_c = free_ids[free_top]
        elif best_c == a:
            continue
        comm[u] = best_c
        comm_pi[a] -= pi_u
        comm_pi[best_c] += pi_u
        comm_size[a] -= 1
        comm_size[best_c] += 1
        if comm_size[a] == 0:
            free_ids[free_top] = a
            free_top += 1
        n_moves += 1
    return n_moves, free_top, stamp


@njit(cache=True, nogil=True)
def within_weight(edge_i, edge_j, weights, labels):
    """Total weight of edges whose endpoints share a cluster."""
    total = 0.0
    for e in range(edge_i.shape[0]):
        if labels[edge_i[e]] == labels[edge_j[e]]:
            total += weights[e]
    return total
