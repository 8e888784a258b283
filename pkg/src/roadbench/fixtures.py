"""Small hand-built networks and seeded generators used by tests, demos and benchmarks.

Vertex ``v_i`` in the hand-built fixtures is id ``i - 1``.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra, minimum_spanning_tree
from scipy.spatial import Delaunay

from .graph import BoundingBox, RoadNetwork

# v1..v8; weights 1 except (v2,v8) and (v6,v8)
FIG1_EDGES = [
    (1, 3, 1), (1, 8, 1), (2, 3, 1), (2, 8, 2), (4, 5, 1),
    (4, 6, 1), (5, 6, 1), (5, 7, 1), (6, 8, 2),
]

# {v1,v2,v3} sit in the lower-left quadrant, {v5,v6,v7} in the upper-right,
# v4 upper-left and v8 lower-right.
FIG1_COORDS = [(1, 1), (3, 0), (0, 3), (1, 6), (6, 6), (5, 5), (7, 7), (5, 1)]

# Same edges on a 16x16 unit grid: v1 alone in cell (0,0) with v3, v8 between
# its two shells; v7 alone in cell (15,0) with v5 between its shells.
FIG3_COORDS = [(0, 0), (5, 5), (3, 0), (8, 8), (12, 0), (6, 0), (15, 0), (0, 3)]
FIG3_BBOX = BoundingBox(0, 0, 16, 16)

# C0 is cell (4,4) holding v1. v2, v3, v5 lie just above the 5x5 block; v4 is
# beyond the 9x9 block upwards, v6 beyond it to the right and reachable only
# through v5.
APPB_EDGES = [(1, 2, 1), (1, 3, 2), (2, 4, 1), (3, 4, 1), (1, 5, 1), (5, 6, 1)]
APPB_COORDS = [(4, 4), (3, 7), (5, 7), (4, 12), (4, 7), (12, 7)]
APPB_BBOX = BoundingBox(0, 0, 16, 16)


def _one_based(edges):
    return [(u - 1, v - 1, w) for u, v, w in edges]


def fig1(coords=None) -> RoadNetwork:
    return RoadNetwork.from_edges(8, _one_based(FIG1_EDGES), coords or FIG1_COORDS)


def fig3() -> RoadNetwork:
    return fig1(FIG3_COORDS)


def appendix_b() -> RoadNetwork:
    return RoadNetwork.from_edges(6, _one_based(APPB_EDGES), APPB_COORDS)


def path_graph(n: int, weight: int = 1) -> RoadNetwork:
    edges = [(i, i + 1, weight) for i in range(n - 1)]
    return RoadNetwork.from_edges(n, edges, [(i, 0) for i in range(n)])


def star_graph(leaves: int) -> RoadNetwork:
    edges = [(0, i, 1) for i in range(1, leaves + 1)]
    coords = [(0, 0)] + [(int(10 * np.cos(a)), int(10 * np.sin(a)))
                         for a in np.linspace(0, 2 * np.pi, leaves, endpoint=False)]
    return RoadNetwork.from_edges(leaves + 1, edges, coords)


def cycle_graph(n: int, weight: int = 1) -> RoadNetwork:
    edges = [(i, (i + 1) % n, weight) for i in range(n)]
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    coords = np.stack([np.round(100 * np.cos(ang)), np.round(100 * np.sin(ang))], axis=1)
    return RoadNetwork.from_edges(n, edges, coords)


# -- geometric helpers --------------------------------------------------------

def _delaunay_edges(pts: np.ndarray) -> np.ndarray:
    tri = Delaunay(pts)
    s = tri.simplices
    e = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def _mst_mask(n: int, edges: np.ndarray, length: np.ndarray) -> np.ndarray:
    g = coo_matrix((length + 1e-9, (edges[:, 0], edges[:, 1])), shape=(n, n)).tocsr()
    t = minimum_spanning_tree(g).tocoo()
    tree = set(zip(np.minimum(t.row, t.col).tolist(), np.maximum(t.row, t.col).tolist()))
    return np.array([(a, b) in tree for a, b in edges.tolist()], dtype=bool)


def _cap_degree(n: int, edges: np.ndarray, keep_first: np.ndarray, max_degree: int) -> np.ndarray:
    """Greedily keep edges (mandatory ones first) while both endpoints stay under the bound."""
    deg = np.zeros(n, dtype=np.int64)
    out = np.zeros(len(edges), dtype=bool)
    order = np.concatenate([np.flatnonzero(keep_first), np.flatnonzero(~keep_first)])
    for i in order.tolist():
        a, b = edges[i]
        if keep_first[i] or (deg[a] < max_degree and deg[b] < max_degree):
            out[i] = True
            deg[a] += 1
            deg[b] += 1
    return out


def random_connected_graph(n: int, seed: int, extra: float = 0.5,
                           max_weight: int = 100, side: int = 10_000) -> RoadNetwork:
    """Planar-ish random graph: Delaunay MST plus a random share of the other triangulation edges.

    Weights are random integers in [1, max_weight], so ties are rare but possible.
    """
    rng = np.random.default_rng(seed)
    pts = rng.choice(side * side, size=n, replace=False)
    coords = np.stack([pts % side, pts // side], axis=1).astype(np.int64)
    if n < 3:
        edges = np.array([[0, 1]]) if n == 2 else np.zeros((0, 2), dtype=np.int64)
    else:
        edges = _delaunay_edges(coords.astype(np.float64))
    if len(edges):
        length = np.hypot(*(coords[edges[:, 0]] - coords[edges[:, 1]]).T)
        tree = _mst_mask(n, edges, length) if n > 2 else np.ones(len(edges), bool)
        pick = tree | (rng.random(len(edges)) < extra)
        pick &= _cap_degree(n, edges, tree, 16)
        edges = edges[pick]
    w = rng.integers(1, max_weight + 1, size=len(edges))
    arr = np.column_stack([edges, w]) if len(edges) else np.zeros((0, 3), np.int64)
    return RoadNetwork.from_edges(n, arr, coords)


# -- synthetic road network ---------------------------------------------------

DE_VERTICES = 48_812


def synthetic_road_network(n: int = DE_VERTICES, seed: int = 2010,
                           width: int = 800_000, height: int = 1_400_000,
                           origin: tuple[int, int] = (-75_800_000, 38_450_000)) -> RoadNetwork:
    """A seeded stand-in for a state-sized road network.

    Junctions cluster around towns over a uniform rural background; roads are
    a Delaunay spanning tree plus short triangulation edges. Routes between
    town centres are upgraded to faster highway and arterial tiers, so travel
    times have the hierarchy real road networks have. Long roads are then cut
    by degree-2 shape points until the vertex count reaches ``n``.
    Coordinates are integer micro-degrees, weights integer travel times.
    """
    rng = np.random.default_rng(seed)
    n_junctions = int(n * 0.55)
    n_towns = max(4, n // 800)
    town_xy = rng.random((n_towns, 2)) * [width, height]
    town_size = rng.pareto(1.5, n_towns) + 1.0
    share = town_size / town_size.sum()
    n_urban = int(n_junctions * 0.6)
    per_town = rng.multinomial(n_urban, share)
    spread = 4_000 + 6_000 * np.sqrt(town_size)
    urban = np.concatenate([
        town_xy[i] + rng.normal(0, spread[i], (k, 2)) for i, k in enumerate(per_town) if k
    ])
    rural = rng.random((n_junctions - len(urban), 2)) * [width, height]
    pts = np.concatenate([urban, rural])
    pts = np.clip(pts, 0, [width, height]).round().astype(np.int64)
    pts = np.unique(pts, axis=0)
    pts = pts[rng.permutation(len(pts))]
    J = len(pts)

    edges = _delaunay_edges(pts.astype(np.float64))
    length = np.hypot(*(pts[edges[:, 0]] - pts[edges[:, 1]]).T)
    tree = _mst_mask(J, edges, length)
    # local density: short edges relative to each endpoint's nearest neighbour
    nearest = np.full(J, np.inf)
    np.minimum.at(nearest, edges[:, 0], length)
    np.minimum.at(nearest, edges[:, 1], length)
    scale = np.maximum(nearest[edges[:, 0]], nearest[edges[:, 1]])
    short = length <= 2.2 * scale
    pick = tree | (short & (rng.random(len(edges)) < 0.55))
    pick &= _cap_degree(J, edges, tree, 6)
    edges, length = edges[pick], length[pick]

    # road tiers: speed in micro-degrees per time unit
    speed = np.full(len(edges), 1.0)
    csr = coo_matrix((length, (edges[:, 0], edges[:, 1])), shape=(J, J)).tocsr()
    csr = csr + csr.T
    hub_of_town = np.array([int(np.argmin(np.hypot(*(pts - c).T))) for c in town_xy])
    hubs = np.unique(hub_of_town)
    big = np.unique(hub_of_town[np.argsort(-town_size)[: max(2, n_towns // 3)]])
    index = {(a, b): i for i, (a, b) in enumerate(edges.tolist())}

    def upgrade(sources, targets, factor):
        _, pred = dijkstra(csr, directed=False, indices=sources, return_predecessors=True)
        for row, s in enumerate(sources):
            for t in targets:
                v = int(t)
                while v != s and pred[row, v] >= 0:
                    p = int(pred[row, v])
                    i = index[(min(p, v), max(p, v))]
                    speed[i] = max(speed[i], factor)
                    v = p

    upgrade(big, big, 3.0)
    upgrade(hubs, hubs[rng.permutation(len(hubs))[: max(2, len(hubs) // 2)]], 1.8)
    base = rng.uniform(0.8, 1.2, len(edges))
    travel = length / (speed * base * 40.0)

    # shape points: split the longest roads until the vertex budget is used
    need = max(0, n - J)
    pieces = np.ones(len(edges), dtype=np.int64)
    if need:
        share = length / length.sum()
        extra = np.floor(share * need).astype(np.int64)
        rest = need - int(extra.sum())
        extra[np.argsort(-(share * need - extra))[:rest]] += 1
        pieces += extra
    coords = [pts]
    out = []
    nxt = J
    for i, (a, b) in enumerate(edges.tolist()):
        k = int(pieces[i])
        wt = max(k, int(np.ceil(travel[i])))
        if k == 1:
            out.append((a, b, wt))
            continue
        frac = np.arange(1, k) / k
        mid = np.round(pts[a] + np.outer(frac, pts[b] - pts[a])).astype(np.int64)
        coords.append(mid)
        chain = [a] + list(range(nxt, nxt + k - 1)) + [b]
        nxt += k - 1
        split = np.diff(np.floor(np.linspace(0, wt, k + 1)).astype(np.int64))
        out.extend((chain[j], chain[j + 1], int(split[j])) for j in range(k))
    xy = np.concatenate(coords) + np.asarray(origin, dtype=np.int64)
    net = RoadNetwork.from_edges(nxt, out, xy)
    return net.largest_component()


def spatial_window(net: RoadNetwork, size: int, center=None) -> RoadNetwork:
    """Largest component of the smallest centred L-infinity window holding about ``size`` vertices."""
    c = net.coords
    if center is None:
        bb = net.bbox
        center = ((bb.min_x + bb.max_x) // 2, (bb.min_y + bb.max_y) // 2)
    r = np.max(np.abs(c - np.asarray(center)), axis=1)
    order = np.sort(r)
    lo, hi = 0, len(order) - 1
    best = None
    # grow the radius until the component (not just the window) reaches the target
    while lo <= hi:
        mid = (lo + hi) // 2
        sub = net.subgraph(np.flatnonzero(r <= order[mid])).largest_component()
        if sub.n >= size:
            best, hi = sub, mid - 1
        else:
            lo = mid + 1
    return best if best is not None else net


def de_network() -> tuple[RoadNetwork, str]:
    """The DE benchmark network and its label.

    Real DIMACS files are used when ROADBENCH_DE_GR and ROADBENCH_DE_CO point
    at them; otherwise the seeded synthetic stand-in is generated.
    """
    import os
    from .graph import load_dimacs
    gr, co = os.environ.get("ROADBENCH_DE_GR"), os.environ.get("ROADBENCH_DE_CO")
    if gr and co:
        return load_dimacs(gr, co), "DE"
    return synthetic_road_network(), "DE-synthetic"
