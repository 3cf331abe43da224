"""Fill-reducing ordering by greedy minimum degree.

A basic minimum-degree ordering over the elimination graph, with lazy
heap-based degree updates and a mass-elimination shortcut once the remaining
graph is a clique. Any permutation this returns is valid for the
factorization routines; only the fill differs.
"""

from __future__ import annotations

import heapq

import numpy as np

from .sparse import SparseMatrix


def compute_ordering(pattern: SparseMatrix) -> np.ndarray:
    """Permutation of 0..N-1 intended to reduce factorization fill.

    ``pattern`` must be square and symmetric-flagged; values are ignored.
    """
    if not pattern.symmetric or pattern.nrows != pattern.ncols:
        raise ValueError("ordering requires a square symmetric-flagged pattern")
    n = pattern.nrows
    if n == 0:
        return np.zeros(0, dtype=np.int64)

    full = pattern.to_scipy_full().tocsr()
    adj = []
    for i in range(n):
        nbrs = set(full.indices[full.indptr[i]:full.indptr[i + 1]].tolist())
        nbrs.discard(i)
        adj.append(nbrs)

    perm = np.empty(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    heap = [(len(adj[i]), i) for i in range(n)]
    heapq.heapify(heap)
    remaining = n
    pos = 0
    while remaining > 0:
        deg, v = heapq.heappop(heap)
        if not alive[v] or deg != len(adj[v]):
            continue
        if deg == remaining - 1:
            # Remaining nodes form a clique; eliminate them in index order.
            rest = sorted(i for i in range(n) if alive[i])
            perm[pos:pos + len(rest)] = rest
            break
        perm[pos] = v
        pos += 1
        alive[v] = False
        remaining -= 1
        nbrs = adj[v]
        for u in nbrs:
            adj[u].discard(v)
        # Connect the eliminated node's neighbours into a clique.
        nlist = list(nbrs)
        for idx, u in enumerate(nlist):
            au = adj[u]
            for w in nlist[idx + 1:]:
                if w not in au:
                    au.add(w)
                    adj[w].add(u)
        for u in nlist:
            heapq.heappush(heap, (len(adj[u]), u))
        adj[v] = set()
    return perm


def symbolic_fill(pattern: SparseMatrix, perm) -> int:
    """Entries the factor gains beyond the matrix pattern under ``perm``.

    Reference oracle used in tests: runs symbolic elimination of the
    permuted pattern and counts the strictly-lower factor entries that were
    not present in the matrix itself.
    """
    if not pattern.symmetric or pattern.nrows != pattern.ncols:
        raise ValueError("fill count requires a square symmetric-flagged pattern")
    n = pattern.nrows
    perm = np.asarray(perm, dtype=np.int64)
    full = pattern.to_scipy_full().tocsr()
    pinv = np.empty(n, dtype=np.int64)
    pinv[perm] = np.arange(n)
    adj = [set() for _ in range(n)]
    for i in range(n):
        pi = pinv[i]
        for j in full.indices[full.indptr[i]:full.indptr[i + 1]]:
            pj = pinv[j]
            if pj != pi:
                adj[pi].add(int(pj))
    fill = 0
    original = [frozenset(a) for a in adj]
    for k in range(n):
        later = sorted(u for u in adj[k] if u > k)
        fill += sum(1 for u in later if u not in original[k])
        for idx, u in enumerate(later):
            for w in later[idx + 1:]:
                adj[u].add(w)
                adj[w].add(u)
    return fill
