"""CSR digraph kernels shared by synthesis: integer-weight Dijkstra and
per-anchor shortest-cycle search.

Edge weights are integer unit counts (multiples of the diagonal move
length), which keeps all cost arithmetic exact.  Distance keys pack
(units << HOP_BITS) | hops so equal-cost paths compare by hop count,
making searches and tie-breaks fully deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit

HOP_BITS = 24
HOP_MASK = (1 << HOP_BITS) - 1
INF = np.int64(1) << np.int64(62)


def key_units(key):
    return int(key) >> HOP_BITS


def key_hops(key):
    return int(key) & HOP_MASK


@njit(cache=True)
def _heap_push(keys, nodes, size, key, node):
    i = size
    keys[i] = key
    nodes[i] = node
    while i > 0:
        parent = (i - 1) >> 1
        if (keys[parent], nodes[parent]) <= (keys[i], nodes[i]):
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        nodes[parent], nodes[i] = nodes[i], nodes[parent]
        i = parent
    return size + 1


@njit(cache=True)
def _heap_pop(keys, nodes, size):
    top_key = keys[0]
    top_node = nodes[0]
    size -= 1
    keys[0] = keys[size]
    nodes[0] = nodes[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        smallest = i
        if l < size and (keys[l], nodes[l]) < (keys[smallest], nodes[smallest]):
            smallest = l
        if r < size and (keys[r], nodes[r]) < (keys[smallest], nodes[smallest]):
            smallest = r
        if smallest == i:
            break
        keys[smallest], keys[i] = keys[i], keys[smallest]
        nodes[smallest], nodes[i] = nodes[i], nodes[smallest]
        i = smallest
    return top_key, top_node, size


@njit(cache=True)
def dijkstra(indptr, indices, weights, sources, n):
    """Multi-source shortest paths; returns (dist keys, predecessors)."""
    dist = np.full(n, INF, dtype=np.int64)
    pred = np.full(n, -1, dtype=np.int64)
    cap = max(16, indices.shape[0] + sources.shape[0] + 1)
    hkeys = np.empty(cap, dtype=np.int64)
    hnodes = np.empty(cap, dtype=np.int64)
    size = 0
    for s in sources:
        dist[s] = 0
        size = _heap_push(hkeys, hnodes, size, 0, s)
    while size > 0:
        key, u, size = _heap_pop(hkeys, hnodes, size)
        if key > dist[u]:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            nk = key + (np.int64(weights[e]) << HOP_BITS) + 1
            if nk < dist[v]:
                dist[v] = nk
                pred[v] = u
                size = _heap_push(hkeys, hnodes, size, nk, v)
    return dist, pred


@njit(cache=True)
def cycle_search(indptr, indices, weights, rev_indptr, rev_indices, rev_weights,
                 anchors, pre_keys, scc, bound0):
    """Shortest anchor->anchor cycle (>= 1 edge) per anchor, best-first.

    Anchors must be ordered by ascending (prefix key, node id).  An anchor
    is pruned only once its total is provably strictly worse than the best
    total seen, so anchors tying the optimum are still resolved exactly.
    Each search stays inside the anchor's strongly connected component.
    The incumbent follows the plan tie-break (total units, prefix hops,
    node id) and its predecessor map is snapshotted for reconstruction.

    Returns (cycle keys, closing in-neighbor, incumbent anchor position,
    pred-snapshot nodes, pred-snapshot values, searches run).
    """
    n = indptr.shape[0] - 1
    m = anchors.shape[0]
    cyc = np.full(m, INF, dtype=np.int64)
    close_from = np.full(m, -1, dtype=np.int64)

    dist = np.empty(n, dtype=np.int64)
    pred = np.empty(n, dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    snap_nodes = np.empty(n, dtype=np.int64)
    snap_preds = np.empty(n, dtype=np.int64)
    snap_len = 0

    cap = max(16, indices.shape[0] + 2)
    hkeys = np.empty(cap, dtype=np.int64)
    hnodes = np.empty(cap, dtype=np.int64)

    best_units = bound0      # pruning bound on total units
    inc_idx = -1             # incumbent anchor position
    inc_units = INF
    inc_pre_hops = INF
    inc_node = INF
    runs = 0
    epoch = 0
    for i in range(m):
        f = anchors[i]
        pre_u = pre_keys[i] >> HOP_BITS
        if pre_u > best_units:
            break  # anchors sorted by prefix key: all later ones are worse
        limit_units = best_units - pre_u
        comp = scc[f]
        epoch += 1
        runs += 1
        ntouched = 0
        size = 0
        dist[f] = 0
        pred[f] = -1
        stamp[f] = epoch
        touched[ntouched] = f
        ntouched += 1
        size = _heap_push(hkeys, hnodes, size, 0, f)
        best_close = INF
        best_close_from = np.int64(-1)
        while size > 0:
            key, u, size = _heap_pop(hkeys, hnodes, size)
            if stamp[u] != epoch or key > dist[u]:
                continue
            if (key >> HOP_BITS) > limit_units or key >= best_close:
                break
            for e in range(rev_indptr[f], rev_indptr[f + 1]):
                if rev_indices[e] == u:
                    ck = key + (np.int64(rev_weights[e]) << HOP_BITS) + 1
                    if (ck >> HOP_BITS) <= limit_units and (
                            ck < best_close or (ck == best_close and u < best_close_from)):
                        best_close = ck
                        best_close_from = u
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if scc[v] != comp:
                    continue
                nk = key + (np.int64(weights[e]) << HOP_BITS) + 1
                if (nk >> HOP_BITS) > limit_units:
                    continue
                if stamp[v] != epoch:
                    stamp[v] = epoch
                    dist[v] = nk
                    pred[v] = u
                    touched[ntouched] = v
                    ntouched += 1
                    size = _heap_push(hkeys, hnodes, size, nk, v)
                elif nk < dist[v]:
                    dist[v] = nk
                    pred[v] = u
                    size = _heap_push(hkeys, hnodes, size, nk, v)
        if best_close < INF:
            cyc[i] = best_close
            close_from[i] = best_close_from
            total_units = pre_u + (best_close >> HOP_BITS)
            pre_hops = pre_keys[i] & HOP_MASK
            better = False
            if inc_idx == -1 or total_units < inc_units:
                better = True
            elif total_units == inc_units:
                if pre_hops < inc_pre_hops or (pre_hops == inc_pre_hops and f < inc_node):
                    better = True
            if better:
                inc_idx = i
                inc_units = total_units
                inc_pre_hops = pre_hops
                inc_node = f
                snap_len = ntouched
                for t in range(ntouched):
                    snap_nodes[t] = touched[t]
                    snap_preds[t] = pred[touched[t]]
            if total_units < best_units:
                best_units = total_units
    return cyc, close_from, inc_idx, snap_nodes[:snap_len].copy(), snap_preds[:snap_len].copy(), runs


def build_reverse(indptr, indices, weights, n):
    order = np.argsort(indices, kind="stable")
    rsrc = indices[order]
    rind = np.repeat(np.arange(n, dtype=indices.dtype), np.diff(indptr))[order]
    rw = weights[order]
    rptr = np.zeros(n + 1, dtype=indptr.dtype)
    np.add.at(rptr, rsrc + 1, 1)
    np.cumsum(rptr, out=rptr)
    return rptr, rind, rw
