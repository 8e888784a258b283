"""Query-set generation and the redundancy (delta) measurement.

Random numbers come from xorshift64* (Vigna: shifts 12, 25, 27, multiplier
0x2545F4914F6CDD1D) seeded through splitmix64, so a query file can be
regenerated bit for bit in any language.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _scipy_dijkstra
from scipy.spatial import cKDTree

from .baseline import canonical_path, canonical_trees
from .graph import INF, DimacsError, RoadNetwork

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
BUCKETS = 10


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, *key: int):
        state = 0x5EED
        for k in key:
            state = splitmix64(state ^ (int(k) & MASK64))
        self.state = state or 0x9E3779B97F4A7C15

    def next(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, n: int) -> int:
        """Integer in [0, n) by multiply-high (bias below 2**-32 for n < 2**32)."""
        return (self.next() * n) >> 64


@dataclass
class QuerySet:
    label: str
    pairs: list[tuple[int, int]]
    lo: float
    hi: float
    seed: int
    complete: bool = True

    def __len__(self) -> int:
        return len(self.pairs)


def linf(net: RoadNetwork, s: int, t: int) -> int:
    a, b = net.coords[s], net.coords[t]
    return int(max(abs(a[0] - b[0]), abs(a[1] - b[1])))


def grid_unit(net: RoadNetwork, cells: int = 1024) -> float:
    bb = net.bbox
    return max(bb.width, bb.height) / cells


def gen_linf_sets(net: RoadNetwork, count: int, seed: int,
                  attempt_factor: int = 1000) -> list[QuerySet]:
    """Q_1..Q_10: pairs with L-infinity distance in [2^(i-1) l, 2^i l).

    Each attempt draws a uniform source and then a uniform target among the
    vertices in that source's L-infinity annulus (found with a k-d tree); a
    source with an empty annulus is a rejected attempt.
    """
    l = grid_unit(net)
    tree = cKDTree(net.coords.astype(np.float64))
    c = net.coords
    out = []
    for i in range(1, BUCKETS + 1):
        lo, hi = 2 ** (i - 1) * l, 2 ** i * l
        rng = XorShift64Star(seed, 1, i)
        pairs = []
        attempts = 0
        while len(pairs) < count and attempts < attempt_factor * count:
            attempts += 1
            s = rng.below(net.n)
            cand = np.asarray(tree.query_ball_point(c[s], hi, p=np.inf, return_sorted=True), dtype=np.int64)
            if not len(cand):
                continue
            d = np.max(np.abs(c[cand] - c[s]), axis=1)
            cand = cand[(d >= lo) & (d < hi)]
            if not len(cand):
                continue
            pairs.append((s, int(cand[rng.below(len(cand))])))
        qs = QuerySet(f"Q{i}", pairs, lo, hi, seed, len(pairs) == count)
        if not qs.complete:
            log.warning("%s: only %d of %d pairs found", qs.label, len(pairs), count)
        out.append(qs)
    return out


def estimate_diameter(net: RoadNetwork, seed: int, sweeps: int = 3) -> int:
    """Double sweep: jump to the farthest vertex repeatedly, keep the largest eccentricity."""
    rng = XorShift64Star(seed, 2)
    v = rng.below(net.n)
    best = 0
    for _ in range(sweeps):
        d = _distances(net, v)
        far = int(np.argmax(d))
        best = max(best, int(d[far]))
        v = far
    return best


def _distances(net: RoadNetwork, s: int) -> np.ndarray:
    if net.has_zero_weights:
        from .baseline import sssp
        return np.asarray(sssp(net, s).dist, dtype=np.int64)
    return _scipy_dijkstra(net.csr(), directed=True, indices=s).astype(np.int64)


def gen_network_sets(net: RoadNetwork, count: int, seed: int,
                     attempt_factor: int = 1000) -> list[QuerySet]:
    """R_1..R_10: pairs with dist in [2^(i-11) l_d, 2^(i-10) l_d).

    One shortest-path tree per drawn source; each still-open bucket takes one
    uniformly drawn target from that tree's matching distance band.
    """
    ld = estimate_diameter(net, seed)
    bounds = [(2.0 ** (i - 11) * ld, 2.0 ** (i - 10) * ld) for i in range(1, BUCKETS + 1)]
    rng = XorShift64Star(seed, 3)
    pairs: list[list[tuple[int, int]]] = [[] for _ in range(BUCKETS)]
    cap = attempt_factor * count
    trees = 0
    while trees < cap and any(len(p) < count for p in pairs):
        trees += 1
        s = rng.below(net.n)
        d = _distances(net, s)
        pick = XorShift64Star(seed, 4, s, trees)
        for b, (lo, hi) in enumerate(bounds):
            if len(pairs[b]) >= count:
                continue
            cand = np.flatnonzero((d >= lo) & (d < hi))
            cand = cand[cand != s]
            if len(cand):
                pairs[b].append((s, int(cand[pick.below(len(cand))])))
    out = []
    for b, (lo, hi) in enumerate(bounds):
        qs = QuerySet(f"R{b + 1}", pairs[b], lo, hi, seed, len(pairs[b]) == count)
        if not qs.complete:
            log.warning("%s: only %d of %d pairs found", qs.label, len(pairs[b]), count)
        out.append(qs)
    return out


def random_pairs(net: RoadNetwork, count: int, seed: int) -> list[tuple[int, int]]:
    rng = XorShift64Star(seed, 5)
    return [(rng.below(net.n), rng.below(net.n)) for _ in range(count)]


# -- query files ----------------------------------------------------------------

def write_queryset(qs: QuerySet, out: TextIO, net: RoadNetwork) -> None:
    ids = net.original_ids
    out.write(f"# queryset {qs.label} {qs.seed} {qs.lo!r} {qs.hi!r}\n")
    for s, t in qs.pairs:
        out.write(f"{ids[s]} {ids[t]}\n")


def read_querysets(src: TextIO, net: RoadNetwork) -> list[QuerySet]:
    back = {int(o): i for i, o in enumerate(net.original_ids.tolist())}
    sets: list[QuerySet] = []
    for lineno, line in enumerate(src, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "queryset":
                if len(parts) != 5:
                    raise DimacsError(f"line {lineno}: malformed queryset header")
                sets.append(QuerySet(parts[1], [], float(parts[3]), float(parts[4]), int(parts[2])))
            continue
        if not sets:
            sets.append(QuerySet("pairs", [], 0.0, 0.0, 0))
        try:
            a, b = (back[int(x)] for x in line.split())
        except (KeyError, ValueError):
            raise DimacsError(f"line {lineno}: bad query pair {line!r}") from None
        sets[-1].pairs.append((a, b))
    return sets


# -- redundancy -------------------------------------------------------------------

@dataclass
class RedundancyReport:
    rows: list[tuple[int, int, int, int | None, float | None]] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        return [r[4] for r in self.rows if r[4] is not None]

    @property
    def min_ratio(self) -> float | None:
        r = self.ratios
        return min(r) if r else None

    @property
    def no_alternative(self) -> int:
        return sum(1 for r in self.rows if r[4] is None)

    def write_csv(self, out: TextIO, net: RoadNetwork | None = None) -> None:
        ids = net.original_ids if net is not None else None
        out.write("s,t,len_p,len_pprime,ratio\n")
        for s, t, lp, lq, ratio in self.rows:
            if ids is not None:
                s, t = int(ids[s]), int(ids[t])
            out.write(f"{s},{t},{lp},{'' if lq is None else lq},{'' if ratio is None else repr(ratio)}\n")


def _avoiding(net: RoadNetwork, s: int, t: int, banned: set[int], banned_edge) -> int | None:
    nbrs, wts = net.nbrs, net.wts
    dist = {s: 0}
    done = set()
    heap = [(0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == t:
            return d
        done.add(u)
        for x, w in zip(nbrs[u], wts[u]):
            if x in banned or (u, x) == banned_edge or (x, u) == banned_edge:
                continue
            nd = d + w
            if nd < dist.get(x, INF):
                dist[x] = nd
                heapq.heappush(heap, (nd, x))
    return None


def _avoiding_scipy(net: RoadNetwork, s: int, t: int, interior: list[int], single_edge: bool):
    # banned arcs keep their slot in the CSR arrays but become infinitely long
    ban = np.zeros(net.n, dtype=bool)
    ban[interior] = True
    src, dst = net.arc_src, net.arc_dst
    mask = ban[src] | ban[dst]
    if single_edge:
        mask |= ((src == s) & (dst == t)) | ((src == t) & (dst == s))
    data = net.arc_w.astype(np.float64)
    data[mask] = np.inf
    g = csr_matrix((data, dst, net.indptr), shape=(net.n, net.n))
    d = _scipy_dijkstra(g, directed=True, indices=s)[t]
    return None if np.isinf(d) else int(d)


def _canonical_scipy(net: RoadNetwork, s: int, t: int) -> tuple[list[int], int]:
    dist, parent = canonical_trees(net, [s])
    verts = [t]
    while verts[-1] != s:
        verts.append(int(parent[0, verts[-1]]))
    return verts[::-1], int(dist[0, t])


def measure_delta(net: RoadNetwork, queries: Iterable[tuple[int, int]],
                  compiled: bool | None = None) -> RedundancyReport:
    """Length of the best path sharing no interior vertex (and, for one-edge paths, not that edge) with P.

    ``compiled`` picks scipy's Dijkstra (default when every weight is positive)
    over the pure-Python searches; both give the same numbers.
    """
    if compiled is None:
        compiled = not net.has_zero_weights
    rep = RedundancyReport()
    for s, t in queries:
        if s == t:
            continue
        if compiled:
            verts, length = _canonical_scipy(net, s, t)
            alt = _avoiding_scipy(net, s, t, verts[1:-1], len(verts) == 2)
            rep.rows.append((s, t, length, alt, None if alt is None else alt / length))
            continue
        p = canonical_path(net, s, t)
        interior = set(p.vertices[1:-1])
        edge = (s, t) if p.k == 1 else None
        alt = _avoiding(net, s, t, interior, edge)
        ratio = None if alt is None else alt / p.length if p.length else None
        rep.rows.append((s, t, p.length, alt, ratio))
    return rep
