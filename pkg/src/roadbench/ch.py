"""Contraction Hierarchies.

Vertices are contracted one at a time. Before ``v`` leaves the remaining
graph, every pair of its neighbours whose only shortest connection runs
through ``v`` gets a shortcut tagged with ``v``. The arcs a vertex still has
when it is contracted all lead to higher-ranked vertices; those upward arcs are
the whole search graph of the query.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .graph import INF, ContractViolation, Path, RoadNetwork

log = logging.getLogger(__name__)

NO_MIDDLE = -1


@dataclass
class CHParams:
    # None: heuristic ordering; "identity": v0 < v1 < ...; or an explicit
    # sequence listing vertices from first contracted to last.
    order: object = None
    # settle cap for the witness searches used only to estimate priorities
    sim_settle_limit: int = 200
    # settle cap for the real witness searches; None keeps them exact
    witness_settle_limit: int | None = None


class CHIndex:
    """Rank permutation plus the upward arcs of every vertex.

    ``arcs`` rows are ``(low, high, weight, middle)`` where ``rank[low] <
    rank[high]`` and ``middle`` is ``NO_MIDDLE`` for original edges.
    """

    def __init__(self, n: int, rank: np.ndarray, arcs: np.ndarray):
        self.n = int(n)
        self.rank = np.asarray(rank, dtype=np.int64)
        arcs = np.asarray(arcs, dtype=np.int64).reshape(-1, 4)
        order = np.lexsort((arcs[:, 1], arcs[:, 0]))
        self.arcs = arcs[order]
        up_n: list[list[int]] = [[] for _ in range(self.n)]
        up_w: list[list[int]] = [[] for _ in range(self.n)]
        mid: dict[tuple[int, int], int] = {}
        for a, b, w, m in self.arcs.tolist():
            up_n[a].append(b)
            up_w[a].append(w)
            mid[(a, b) if a < b else (b, a)] = m
        self.up_nbrs = up_n
        self.up_wts = up_w
        self._mid = mid

    @property
    def num_shortcuts(self) -> int:
        return int((self.arcs[:, 3] != NO_MIDDLE).sum())

    def shortcuts(self) -> list[tuple[int, int, int, int]]:
        return [tuple(r) for r in self.arcs[self.arcs[:, 3] != NO_MIDDLE].tolist()]

    def middle(self, a: int, b: int) -> int:
        return self._mid[(a, b) if a < b else (b, a)]

    # -- queries --------------------------------------------------------

    def _search(self, s: int, t: int, stats: dict | None = None):
        up_n, up_w = self.up_nbrs, self.up_wts
        dist = ({s: 0}, {t: 0})
        parent = ({s: -1}, {t: -1})
        heaps = ([(0, s)], [(0, t)])
        done = (set(), set())
        active = [True, True]
        mu, meet = (0, s) if s == t else (INF, -1)
        pop, push = heapq.heappop, heapq.heappush
        side = 0
        while active[0] or active[1]:
            if not active[side]:
                side = 1 - side
            heap = heaps[side]
            if not heap or heap[0][0] >= mu:
                active[side] = False
                side = 1 - side
                continue
            d, u = pop(heap)
            fin = done[side]
            if u in fin:
                continue
            fin.add(u)
            o = dist[1 - side].get(u)
            if o is not None and d + o < mu:
                mu, meet = d + o, u
            own, par = dist[side], parent[side]
            for x, w in zip(up_n[u], up_w[u]):
                nd = d + w
                if nd < own.get(x, INF):
                    own[x] = nd
                    par[x] = u
                    push(heap, (nd, x))
            side = 1 - side
        if stats is not None:
            stats["settled"] = len(done[0]) + len(done[1])
        return mu, meet, parent

    def distance(self, s: int, t: int, stats: dict | None = None) -> int:
        self._check(s, t)
        return self._search(s, t, stats)[0]

    def path(self, s: int, t: int, stats: dict | None = None) -> Path:
        self._check(s, t)
        mu, meet, parent = self._search(s, t, stats)
        if s == t:
            return Path.trivial(s)
        up = [meet]
        while parent[0][up[-1]] != -1:
            up.append(parent[0][up[-1]])
        up.reverse()
        down = [meet]
        while parent[1][down[-1]] != -1:
            down.append(parent[1][down[-1]])
        hops = up + down[1:]
        out = [hops[0]]
        for a, b in zip(hops, hops[1:]):
            self._unpack(a, b, out)
        return Path(tuple(out), mu)

    def _unpack(self, a: int, b: int, out: list[int]) -> None:
        """Append the original-edge expansion of arc a->b (excluding a) to ``out``."""
        stack = [(a, b)]
        mid = self._mid
        while stack:
            x, y = stack.pop()
            m = mid[(x, y) if x < y else (y, x)]
            if m == NO_MIDDLE:
                out.append(y)
            else:
                stack.append((m, y))
                stack.append((x, m))

    def unpack_arc(self, a: int, b: int) -> list[int]:
        out = [a]
        self._unpack(a, b, out)
        return out

    def _check(self, s: int, t: int) -> None:
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise ContractViolation("query vertex out of range")


# -- preprocessing ------------------------------------------------------------

class _Contractor:
    def __init__(self, net: RoadNetwork, witness_limit: int | None):
        self.adj: list[dict[int, int]] = [dict(zip(nb, wt)) for nb, wt in zip(net.nbrs, net.wts)]
        self.mid: dict[tuple[int, int], int] = {}
        self.contracted = [False] * net.n
        self.deleted_nbrs = [0] * net.n
        self.witness_limit = witness_limit
        self.arcs: list[tuple[int, int, int, int]] = []

    def _witness(self, u: int, skip: int, targets: dict[int, int], cap: int | None) -> dict[int, int]:
        """Distances from u (avoiding ``skip``) to the targets, exact up to max(targets)."""
        limit = max(targets.values())
        adj = self.adj
        dist = {u: 0}
        done = set()
        found: dict[int, int] = {}
        heap = [(0, u)]
        pop, push = heapq.heappop, heapq.heappush
        while heap:
            d, x = pop(heap)
            if x in done:
                continue
            if d > limit:
                break
            done.add(x)
            if x in targets:
                found[x] = d
                if len(found) == len(targets):
                    break
            if cap is not None and len(done) >= cap:
                break
            for y, w in adj[x].items():
                if y == skip:
                    continue
                nd = d + w
                if nd < dist.get(y, INF):
                    dist[y] = nd
                    push(heap, (nd, y))
        return found

    def needed(self, v: int, cap: int | None) -> list[tuple[int, int, int]]:
        nb = sorted(self.adj[v].items())
        if len(nb) < 2:
            return []
        # An arc that is longer than some detour lies on no shortest path, so
        # pairs using it need no shortcut; skipping them keeps every shortcut
        # weight equal to the true distance.
        reach = self._witness(v, -1, dict(nb), cap)
        nb = [(u, w) for u, w in nb if reach.get(u, w) >= w]
        out = []
        for i, (u, wu) in enumerate(nb[:-1]):
            targets = {x: wu + wx for x, wx in nb[i + 1:]}
            found = self._witness(u, v, targets, cap)
            for x, via in targets.items():
                if found.get(x, INF) > via:
                    out.append((u, x, via))
        return out

    def priority(self, v: int, cap: int) -> int:
        ed = len(self.needed(v, cap)) - len(self.adj[v])
        return 2 * ed + self.deleted_nbrs[v]

    def contract(self, v: int) -> int:
        adj = self.adj
        for u, w in sorted(adj[v].items()):
            self.arcs.append((v, u, w, self.mid.get((v, u) if v < u else (u, v), NO_MIDDLE)))
        added = 0
        for u, x, w in self.needed(v, self.witness_limit):
            old = adj[u].get(x)
            if old is None or w < old:
                adj[u][x] = w
                adj[x][u] = w
                self.mid[(u, x) if u < x else (x, u)] = v
                added += 1
        for u in adj[v]:
            del adj[u][v]
            self.deleted_nbrs[u] += 1
        adj[v] = {}
        self.contracted[v] = True
        return added


def _order_from_param(n: int, order) -> list[int]:
    if isinstance(order, str):
        if order != "identity":
            raise ContractViolation(f"unknown order {order!r}")
        return list(range(n))
    seq = [int(x) for x in order]
    if sorted(seq) != list(range(n)):
        raise ContractViolation("order must be a permutation of the vertices")
    return seq


def build_ch(net: RoadNetwork, params: CHParams | None = None) -> CHIndex:
    """Order (unless fixed by ``params.order``) and contract in one pass."""
    params = params or CHParams()
    n = net.n
    c = _Contractor(net, params.witness_settle_limit)
    rank = np.empty(n, dtype=np.int64)
    if params.order is not None:
        for r, v in enumerate(_order_from_param(n, params.order)):
            c.contract(v)
            rank[v] = r
        return CHIndex(n, rank, np.array(c.arcs, dtype=np.int64).reshape(-1, 4))
    cap = params.sim_settle_limit
    heap = [(c.priority(v, cap), v) for v in range(n)]
    heapq.heapify(heap)
    r = 0
    while heap:
        p, v = heapq.heappop(heap)
        if c.contracted[v]:
            continue
        q = c.priority(v, cap)
        if heap and (q, v) > heap[0]:
            heapq.heappush(heap, (q, v))
            continue
        c.contract(v)
        rank[v] = r
        r += 1
        if r % 10_000 == 0:
            log.info("contracted %d / %d vertices", r, n)
    return CHIndex(n, rank, np.array(c.arcs, dtype=np.int64).reshape(-1, 4))


def compute_order(net: RoadNetwork, params: CHParams | None = None) -> np.ndarray:
    """Rank of every vertex (0 = contracted first)."""
    params = params or CHParams()
    if params.order is not None:
        rank = np.empty(net.n, dtype=np.int64)
        rank[_order_from_param(net.n, params.order)] = np.arange(net.n)
        return rank
    return build_ch(net, params).rank


def contract_all(net: RoadNetwork, rank: Sequence[int],
                 witness_settle_limit: int | None = None) -> CHIndex:
    """Contract in ascending ``rank`` order."""
    rank = np.asarray(rank, dtype=np.int64)
    if sorted(rank.tolist()) != list(range(net.n)):
        raise ContractViolation("rank must be a permutation")
    order = np.argsort(rank, kind="stable")
    return build_ch(net, CHParams(order=order.tolist(), witness_settle_limit=witness_settle_limit))


def ch_distance(idx: CHIndex, s: int, t: int) -> int:
    return idx.distance(s, t)


def ch_path(idx: CHIndex, s: int, t: int) -> Path:
    return idx.path(s, t)
