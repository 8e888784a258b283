"""PCPD: path-coherent pairs of quadtree squares.

A stored pair ``(X, Y, psi)`` promises that the canonical shortest path from
every vertex of square X to every vertex of square Y runs through ``psi``, a
vertex strictly inside every such path or an edge on all of them. Starting
from (root, root), a candidate that fails the test is split into its 16 child
pairs. Diagonal candidates are always split. Vertices that share one quantised
point cannot be separated by squares, so those pairs are stored one by one.
"""
from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .baseline import canonical_trees
from .graph import ContractViolation, IndexCorruption, Path, RoadNetwork
from .morton import DEFAULT_BITS, Quantizer

log = logging.getLogger(__name__)

VERTEX, EDGE = 0, 1


@dataclass(frozen=True)
class PathCoherentPair:
    depth: int
    x_prefix: int
    y_prefix: int
    kind: int  # VERTEX or EDGE
    a: int
    b: int = -1  # second endpoint when kind == EDGE

    @property
    def psi(self):
        return self.a if self.kind == VERTEX else (self.a, self.b)


class _Trees:
    """Canonical shortest-path trees with preorder intervals, per root."""

    def __init__(self, net: RoadNetwork, dense_limit: int, cache: int = 2048):
        self.net = net
        self.dense = net.n <= dense_limit
        self._cache: OrderedDict[int, tuple] = OrderedDict()
        self._cap = cache
        if self.dense:
            dist, parent = canonical_trees(net, np.arange(net.n))
            self.dist, self.parent = dist, parent
            self.tin = np.empty_like(parent)
            self.tout = np.empty_like(parent)
            for r in range(net.n):
                self.tin[r], self.tout[r] = self._euler(parent[r], r)

    @staticmethod
    def _euler(parent: np.ndarray, root: int):
        n = len(parent)
        kids = parent.copy()
        kids[root] = n
        order = np.argsort(kids, kind="stable")
        counts = np.bincount(kids, minlength=n + 1)
        start = np.r_[0, np.cumsum(counts)]
        order_l = order.tolist()
        start_l = start.tolist()
        tin = [0] * n
        tout = [0] * n
        clock = 0
        stack = [root]
        while stack:
            u = stack.pop()
            if u < 0:
                tout[~u] = clock - 1
                continue
            tin[u] = clock
            clock += 1
            stack.append(~u)
            stack.extend(reversed(order_l[start_l[u]:start_l[u + 1]]))
        return np.array(tin), np.array(tout)

    def get(self, r: int):
        if self.dense:
            return self.dist[r], self.parent[r], self.tin[r], self.tout[r]
        hit = self._cache.get(r)
        if hit is not None:
            self._cache.move_to_end(r)
            return hit
        d, p = canonical_trees(self.net, [r])
        tin, tout = self._euler(p[0], r)
        hit = (d[0], p[0], tin, tout)
        self._cache[r] = hit
        if len(self._cache) > self._cap:
            self._cache.popitem(last=False)
        return hit


def _lca(dist, parent, a: int, b: int) -> int:
    while a != b:
        if dist[a] >= dist[b]:
            a = int(parent[a])
        else:
            b = int(parent[b])
    return a


def common_element(trees: _Trees, X: np.ndarray, Y: np.ndarray):
    """psi shared by all canonical X->Y paths, or None.

    The X->Y paths from one root x form the tree path x ~> L plus branches,
    where L is the lowest common ancestor of Y. Shared interior vertices are
    those strictly after x on x ~> L (L itself only when L is not in Y);
    shared edges are the edges of x ~> L.
    """
    yset = set(Y.tolist())
    verts: list[int] | None = None
    edges: list[tuple[int, int]] | None = None
    for x in X.tolist():
        dist, parent, tin, tout = trees.get(x)
        ty = tin[Y]
        a = int(Y[int(np.argmin(ty))])
        b = int(Y[int(np.argmax(ty))])
        L = _lca(dist, parent, a, b)
        if verts is None:
            chain = [L]
            while chain[-1] != x:
                chain.append(int(parent[chain[-1]]))
            chain.reverse()  # x ... L
            verts = [u for u in chain[1:] if u not in yset]
            edges = list(zip(chain, chain[1:]))
        else:
            tl = tin[L]
            verts = [u for u in verts
                     if u != x and tin[u] <= tl <= tout[u] and not (u == L and L in yset)]
            edges = [(u, w) for u, w in edges if parent[w] == u and tin[w] <= tl <= tout[w]]
        if not verts and not edges:
            return None
    if verts:
        return (VERTEX, verts[len(verts) // 2], -1)
    u, w = edges[len(edges) // 2]
    return (EDGE, u, w)


class PCPSet:
    def __init__(self, quantizer: Quantizer, codes: np.ndarray, records: np.ndarray,
                 exceptions: np.ndarray):
        # records: (depth, x_prefix, y_prefix, kind, a, b); exceptions: (s, t, kind, a, b)
        self.quantizer = quantizer
        self.bits = quantizer.bits
        self.codes = np.asarray(codes, dtype=np.int64)
        self.records = np.asarray(records, dtype=np.int64).reshape(-1, 6)
        self.exceptions = np.asarray(exceptions, dtype=np.int64).reshape(-1, 5)
        self.n = len(self.codes)
        self._code = self.codes.tolist()
        self._map = {(d, px, py): (k, a, b) for d, px, py, k, a, b in self.records.tolist()}
        self._ex = {(s, t): (k, a, b) for s, t, k, a, b in self.exceptions.tolist()}

    def __len__(self) -> int:
        return len(self.records) + len(self.exceptions)

    def _find(self, s: int, t: int):
        cs, ct = self._code[s], self._code[t]
        bits = self.bits
        m = self._map
        for d in range(bits + 1):
            shift = 2 * (bits - d)
            ps, pt = cs >> shift, ct >> shift
            if ps == pt:
                continue
            hit = m.get((d, ps, pt))
            if hit is not None:
                return d, ps, pt, hit
        hit = self._ex.get((s, t))
        if hit is None:
            raise IndexCorruption(f"no path-coherent pair covers ({s}, {t})")
        return bits, cs >> 0, ct >> 0, hit

    def lookup_pair(self, s: int, t: int) -> PathCoherentPair:
        if s == t:
            raise ContractViolation("pair lookup needs two distinct vertices")
        d, ps, pt, (k, a, b) = self._find(s, t)
        return PathCoherentPair(d, ps, pt, k, a, b)

    def covering_key(self, s: int, t: int):
        """Identity of the stored entry covering (s, t): a square pair or an exception."""
        cs, ct = self._code[s], self._code[t]
        for d in range(self.bits + 1):
            shift = 2 * (self.bits - d)
            key = (d, cs >> shift, ct >> shift)
            if key[1] != key[2] and key in self._map:
                return key
        return ("pair", s, t) if (s, t) in self._ex else None

    def path(self, net: RoadNetwork, s: int, t: int) -> Path:
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise ContractViolation("query vertex out of range")
        out = [s]
        length = 0
        weight = net.weight
        tasks = [(s, t)]
        budget = 4 * self.n + 4
        while tasks:
            budget -= 1
            if budget < 0:
                raise IndexCorruption(f"decomposition of ({s}, {t}) does not terminate")
            a, b = tasks.pop()
            if b < 0:
                # emit marker for the far end of an edge psi
                v = ~b
                length += weight(out[-1], v)
                out.append(v)
                continue
            if a == b:
                continue
            _, _, _, (k, u, w) = self._find(a, b)
            if k == VERTEX:
                if u == a or u == b:
                    raise IndexCorruption(f"vertex psi {u} is an endpoint of ({a}, {b})")
                tasks.append((u, b))
                tasks.append((a, u))
            else:
                tasks.append((w, b))
                tasks.append((-1, ~w))
                tasks.append((a, u))
        return Path(tuple(out), length)

    def distance(self, net: RoadNetwork, s: int, t: int) -> int:
        return self.path(net, s, t).length


def build_pcp_set(net: RoadNetwork, bits: int = DEFAULT_BITS, dense_limit: int = 6000,
                  stats: dict | None = None) -> PCPSet:
    q = Quantizer.for_coords(net.coords, bits)
    codes = q.codes(net.coords)
    order = np.lexsort((np.arange(net.n), codes))
    sorted_codes = codes[order]
    trees = _Trees(net, dense_limit)

    def members(depth: int, prefix: int) -> np.ndarray:
        shift = 2 * (bits - depth)
        lo = np.searchsorted(sorted_codes, prefix << shift, side="left")
        hi = np.searchsorted(sorted_codes, (prefix + 1) << shift, side="left")
        return order[lo:hi]

    records: list[tuple] = []
    exceptions: list[tuple] = []
    tests = 0
    stack = [(0, 0, 0)] if net.n > 1 else []
    while stack:
        d, px, py = stack.pop()
        X, Y = members(d, px), members(d, py)
        if px != py:
            tests += 1
            psi = common_element(trees, X, Y)
            if psi is not None:
                records.append((d, px, py) + psi)
                continue
        if d == bits:
            # colliding points: cover each ordered pair on its own
            for s in X.tolist():
                for t in Y.tolist():
                    if s != t:
                        psi = common_element(trees, np.array([s]), np.array([t]))
                        exceptions.append((s, t) + psi)
            continue
        kids = []
        for cx in range(4 * px, 4 * px + 4):
            if not len(members(d + 1, cx)):
                continue
            for cy in range(4 * py, 4 * py + 4):
                if len(members(d + 1, cy)):
                    kids.append((d + 1, cx, cy))
        stack.extend(reversed(kids))
    if stats is not None:
        stats["tests"] = tests
        stats["pairs"] = len(records)
        stats["exceptions"] = len(exceptions)
    recs = np.array(sorted(records), dtype=np.int64).reshape(-1, 6)
    exs = np.array(sorted(exceptions), dtype=np.int64).reshape(-1, 5)
    return PCPSet(q, codes, recs, exs)


def lookup_pair(pcp: PCPSet, s: int, t: int) -> PathCoherentPair:
    return pcp.lookup_pair(s, t)


def pcpd_path(pcp: PCPSet, net: RoadNetwork, s: int, t: int) -> Path:
    return pcp.path(net, s, t)


def pcpd_distance(pcp: PCPSet, net: RoadNetwork, s: int, t: int) -> int:
    return pcp.distance(net, s, t)
