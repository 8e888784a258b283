"""Dijkstra searches: the single-source oracle, the bidirectional point-to-point
query and batched canonical shortest-path trees.

Tie-breaking is canonical everywhere: among equally short ways to reach ``v``
the predecessor with the smallest vertex id wins. With positive weights every
tight predecessor is settled before ``v``, so the rule yields a well-defined
shortest-path tree per source. Paths read off these trees are closed under
taking prefixes and suffixes, which SILC, PCPD and the TNR access-node
computation all rely on.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra as _scipy_dijkstra

from .graph import INF, ContractViolation, Path, RoadNetwork

__all__ = [
    "SearchState",
    "sssp",
    "bidi_query",
    "bidi_distance",
    "canonical_path",
    "grow_tree",
    "canonical_trees",
    "first_hops_from_parents",
    "all_pairs_distances",
]


@dataclass
class SearchState:
    source: int
    dist: list[int]
    parent: list[int]
    settled: list[bool]
    order: list[int]

    def path_to(self, t: int) -> Path:
        if not self.settled[t]:
            raise ContractViolation(f"vertex {t} was not settled")
        out = [t]
        parent = self.parent
        while out[-1] != self.source:
            out.append(parent[out[-1]])
        out.reverse()
        return Path(tuple(out), self.dist[t])


def sssp(net: RoadNetwork, source: int,
         stop: Callable[[int, int], bool] | None = None) -> SearchState:
    """Dijkstra from ``source``; ``stop(v, d)`` is called on every settle and ends the search when true."""
    if not 0 <= source < net.n:
        raise ContractViolation(f"source {source} out of range")
    n = net.n
    nbrs, wts = net.nbrs, net.wts
    dist = [INF] * n
    parent = [-1] * n
    settled = [False] * n
    order = []
    dist[source] = 0
    heap = [(0, source)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, u = pop(heap)
        if settled[u]:
            continue
        settled[u] = True
        order.append(u)
        if stop is not None and stop(u, d):
            break
        for x, w in zip(nbrs[u], wts[u]):
            nd = d + w
            dx = dist[x]
            if nd < dx:
                dist[x] = nd
                parent[x] = u
                push(heap, (nd, x))
            elif nd == dx and u < parent[x] and not settled[x]:
                parent[x] = u
    return SearchState(source, dist, parent, settled, order)


def canonical_path(net: RoadNetwork, s: int, t: int) -> Path:
    """The canonical (min-parent-id) shortest path s -> t."""
    state = sssp(net, s, stop=lambda v, d: v == t)
    return state.path_to(t)


def grow_tree(net: RoadNetwork, source: int, targets: Iterable[int] = (),
              limit: int = INF) -> tuple[dict[int, int], dict[int, int], list[int]]:
    """Sparse canonical Dijkstra tree from ``source``.

    Stops once every vertex in ``targets`` is settled (or the queue minimum
    exceeds ``limit``). Returns ``(dist, parent, settle_order)`` restricted to
    settled vertices; parents of settled vertices are final.
    """
    nbrs, wts = net.nbrs, net.wts
    pending = set(targets)
    pending.discard(source)
    dist = {source: 0}
    parent = {source: -1}
    done: dict[int, int] = {}
    order = []
    heap = [(0, source)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, u = pop(heap)
        if u in done:
            continue
        if d > limit:
            break
        done[u] = d
        order.append(u)
        if pending:
            pending.discard(u)
            if not pending and targets:
                break
        for x, w in zip(nbrs[u], wts[u]):
            if x in done:
                continue
            nd = d + w
            dx = dist.get(x, INF)
            if nd < dx:
                dist[x] = nd
                parent[x] = u
                push(heap, (nd, x))
            elif nd == dx and u < parent[x]:
                parent[x] = u
    return done, {v: parent[v] for v in order}, order


def bidi_query(net: RoadNetwork, s: int, t: int, stats: dict | None = None) -> tuple[int, Path]:
    """Bidirectional Dijkstra; returns ``(dist(s, t), shortest path)``.

    The side with the smaller queue minimum advances. Every arc relaxed
    into a vertex already labelled by the other side proposes a candidate
    ``mu``; the search stops once the two queue minima sum to at least ``mu``.
    """
    if not (0 <= s < net.n and 0 <= t < net.n):
        raise ContractViolation("query vertex out of range")
    if s == t:
        return 0, Path.trivial(s)
    nbrs, wts = net.nbrs, net.wts
    dist = ({s: 0}, {t: 0})
    parent = ({s: -1}, {t: -1})
    done = (set(), set())
    heaps = ([(0, s)], [(0, t)])
    pop, push = heapq.heappop, heapq.heappush
    mu = INF
    bridge = None  # (forward-side vertex, backward-side vertex)
    while heaps[0] and heaps[1]:
        kf, kb = heaps[0][0][0], heaps[1][0][0]
        if kf + kb >= mu:
            break
        side = 0 if kf <= kb else 1
        heap, d_own, d_other, par, fin = heaps[side], dist[side], dist[1 - side], parent[side], done[side]
        d, u = pop(heap)
        if u in fin:
            continue
        fin.add(u)
        for x, w in zip(nbrs[u], wts[u]):
            nd = d + w
            dx = d_own.get(x, INF)
            if nd < dx:
                d_own[x] = nd
                par[x] = u
                push(heap, (nd, x))
            elif nd == dx and x not in fin and u < par[x]:
                par[x] = u
            ox = d_other.get(x)
            if ox is not None and nd + ox < mu:
                mu = nd + ox
                bridge = (u, x) if side == 0 else (x, u)
    if stats is not None:
        stats["settled"] = len(done[0]) + len(done[1])
    a, b = bridge
    left = [a]
    while parent[0][left[-1]] != -1:
        left.append(parent[0][left[-1]])
    left.reverse()
    right = [b]
    while parent[1][right[-1]] != -1:
        right.append(parent[1][right[-1]])
    if a == b:
        right = right[1:]
    verts = tuple(left + right)
    return mu, Path(verts, mu)


def bidi_distance(net: RoadNetwork, s: int, t: int) -> int:
    return bidi_query(net, s, t)[0]


# -- batched canonical trees --------------------------------------------------

def _python_trees(net: RoadNetwork, sources: Sequence[int]):
    dist = np.empty((len(sources), net.n), dtype=np.int64)
    parent = np.empty((len(sources), net.n), dtype=np.int32)
    for i, s in enumerate(sources):
        st = sssp(net, int(s))
        dist[i] = st.dist
        parent[i] = st.parent
    return dist, parent


def canonical_trees(net: RoadNetwork, sources: Sequence[int], batch_arcs: int = 1 << 23):
    """Distances and canonical parents for many sources at once.

    Distances come from scipy's compiled Dijkstra; canonical parents are then
    derived arc-parallel as the smallest tight predecessor. Zero-weight edges
    are invisible to scipy's sparse representation, so such networks use the
    pure-Python search instead.
    """
    sources = np.asarray(sources, dtype=np.int64)
    n = net.n
    if net.has_zero_weights or n < 2:
        return _python_trees(net, sources)
    dist = np.empty((len(sources), n), dtype=np.int64)
    parent = np.empty((len(sources), n), dtype=np.int32)
    step = max(1, batch_arcs // max(1, net.num_arcs))
    starts = net.indptr[:-1]
    src_of_arc = net.arc_src
    pred = net.arc_dst
    w = net.arc_w.astype(np.float64)
    big = np.int64(n)
    for lo in range(0, len(sources), step):
        chunk = sources[lo:lo + step]
        d = _scipy_dijkstra(net.csr(), directed=True, indices=chunk)
        tight = d[:, pred] + w == d[:, src_of_arc]
        cand = np.where(tight, pred, big)
        p = np.minimum.reduceat(cand, starts, axis=1)
        p[p == big] = -1
        p[np.arange(len(chunk)), chunk] = -1
        dist[lo:lo + step] = d.astype(np.int64)
        parent[lo:lo + step] = p
    return dist, parent


def first_hops_from_parents(parent: np.ndarray, sources: Sequence[int]) -> np.ndarray:
    """For each tree row, the child of the root on the path to every vertex (-1 at the root)."""
    parent = np.asarray(parent, dtype=np.int64)
    k, n = parent.shape
    sources = np.asarray(sources, dtype=np.int64)
    cols = np.broadcast_to(np.arange(n), (k, n))
    is_child = parent == sources[:, None]
    hop = np.where(is_child, cols, -1).ravel()
    resolved = is_child.copy()
    resolved[np.arange(k), sources] = True
    resolved = resolved.ravel()
    base = (np.arange(k) * n)[:, None]
    ptr = (np.where(parent < 0, 0, parent) + base).ravel()
    todo = np.flatnonzero(~resolved)
    while len(todo):
        p = ptr[todo]
        ok = resolved[p]
        done_idx = todo[ok]
        hop[done_idx] = hop[p[ok]]
        resolved[done_idx] = True
        rest = todo[~ok]
        ptr[rest] = ptr[ptr[rest]]
        todo = rest
    return hop.reshape(k, n)


def all_pairs_distances(net: RoadNetwork) -> np.ndarray:
    """n x n distance matrix from n pure-Python Dijkstra runs (the test oracle)."""
    out = np.empty((net.n, net.n), dtype=np.int64)
    for s in range(net.n):
        out[s] = sssp(net, s).dist
    return out
