"""Transit Node Routing on a uniform grid.

Shells are measured in cells: ``gap(C, D)`` is the Chebyshev distance between
cell coordinates, the inner block of C is ``gap <= 2`` (5x5) and the outer
block ``gap <= 4`` (9x9). An edge crosses a block boundary when exactly one
endpoint lies in a cell of the block.

Access nodes of C are collected from canonical shortest paths between the
vertices of C and ``V_out`` (endpoints of edges crossing the outer boundary):

* forward: on ``v -> u`` (v in C, u in V_out) the first edge leaving the inner
  block, keeping its endpoint outside the block;
* backward: on ``u -> v`` the last edge entering the inner block, keeping its
  endpoint inside the block.

Canonical paths are closed under prefixes and suffixes, so on the canonical
path from s to a far t the forward node of C_s comes no later than the
backward node of C_t, which is what makes the table lookup exact. Keeping the
outside endpoint on both sides is not enough: one edge can leave the inner
block of C_s and enter that of C_t, and the two nodes then come in the wrong
order.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra as _scipy_dijkstra

from .baseline import bidi_query, grow_tree
from .ch import CHIndex, build_ch
from .graph import INF, BoundingBox, ContractViolation, Path, RoadNetwork, path_concat

log = logging.getLogger(__name__)

INNER, OUTER = 2, 4
DIST_GAP, PATH_GAP = OUTER + 1, 2 * OUTER + 1


class GridError(ValueError):
    pass


@dataclass
class Grid:
    g: int
    bbox: BoundingBox
    cx: np.ndarray
    cy: np.ndarray

    @property
    def cell(self) -> np.ndarray:
        return self.cy * self.g + self.cx

    def cell_of(self, v: int) -> int:
        return int(self.cy[v]) * self.g + int(self.cx[v])

    def xy(self, cell: int) -> tuple[int, int]:
        return cell % self.g, cell // self.g

    def gap(self, a: int, b: int) -> int:
        g = self.g
        return max(abs(a % g - b % g), abs(a // g - b // g))

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v, c in enumerate(self.cell.tolist()):
            out.setdefault(c, []).append(v)
        return out


def build_grid(net: RoadNetwork, g: int = 128, bbox: BoundingBox | None = None) -> Grid:
    """Assign every vertex to one of g x g cells (half-open, the max edge clamps inward)."""
    if g < 1:
        raise GridError("grid needs at least one cell per side")
    bb = bbox or net.bbox
    w, h = bb.max_x - bb.min_x, bb.max_y - bb.min_y
    if w <= 0 or h <= 0:
        raise GridError("degenerate bounding box: use a smaller grid or another method")
    c = net.coords
    if len(c) and not all(bb.contains(int(x), int(y)) for x, y in (c.min(axis=0), c.max(axis=0))):
        raise GridError("bounding box does not contain every vertex")
    cx = np.minimum(((c[:, 0] - bb.min_x) * g) // w, g - 1)
    cy = np.minimum(((c[:, 1] - bb.min_y) * g) // h, g - 1)
    return Grid(g, bb, cx.astype(np.int64), cy.astype(np.int64))


@dataclass(frozen=True)
class Locality:
    gap: int

    @property
    def distance_answerable(self) -> bool:
        return self.gap >= DIST_GAP

    @property
    def path_answerable(self) -> bool:
        return self.gap >= PATH_GAP

    @property
    def local(self) -> bool:
        return self.gap < DIST_GAP


def locality(grid: Grid, s: int, t: int) -> Locality:
    return Locality(grid.gap(grid.cell_of(s), grid.cell_of(t)))


@dataclass
class AccessNodeSet:
    cell: int
    nodes: tuple[int, ...]
    dist: dict[int, tuple[int, ...]] = field(default_factory=dict)


# -- access nodes -------------------------------------------------------------

class _Geometry:
    """Per-vertex cell coordinates and the outer-boundary vertex sets."""

    def __init__(self, net: RoadNetwork, grid: Grid):
        self.g = grid.g
        self.cx = grid.cx.tolist()
        self.cy = grid.cy.tolist()
        self.cells = grid.members()
        self.nbrs = net.nbrs

    def gap_to(self, cell: int, v: int) -> int:
        g = self.g
        return max(abs(cell % g - self.cx[v]), abs(cell // g - self.cy[v]))

    def v_out(self, cell: int) -> list[int]:
        g = self.g
        x0, y0 = cell % g, cell // g
        out = set()
        for yy in range(max(0, y0 - OUTER), min(g, y0 + OUTER + 1)):
            for xx in range(max(0, x0 - OUTER), min(g, x0 + OUTER + 1)):
                for a in self.cells.get(yy * g + xx, ()):
                    for b in self.nbrs[a]:
                        if self.gap_to(cell, b) > OUTER:
                            out.add(a)
                            out.add(b)
        return sorted(out)


def _forward(net: RoadNetwork, geo: _Geometry, cell: int, vout: list[int],
             extra: set[int] = frozenset()):
    """Forward access nodes of ``cell`` plus the search trees' distances for I_2."""
    found: set[int] = set()
    dists = {}
    for v in geo.cells[cell]:
        dist, parent, order = grow_tree(net, v, targets=set(vout) | set(extra))
        exit_edge: dict[int, tuple[int, int] | None] = {v: None}
        for x in order[1:]:
            p = parent[x]
            e = exit_edge[p]
            if e is None and geo.gap_to(cell, x) > INNER and geo.gap_to(cell, p) <= INNER:
                e = (p, x)
            exit_edge[x] = e
        for u in vout:
            # boundary vertices inside the inner block have nothing to cross
            e = exit_edge.get(u)
            if e is not None:
                found.add(e[1])
        dists[v] = dist
    return found, dists


def _backward(net: RoadNetwork, geo: _Geometry, u: int, cells: list[int]) -> dict[int, set[int]]:
    """Backward access nodes contributed by the tree rooted at ``u`` for each of ``cells``."""
    targets = [v for c in cells for v in geo.cells[c]]
    _, parent, _ = grow_tree(net, u, targets=targets)
    out = {}
    for c in cells:
        acc = set()
        for v in geo.cells[c]:
            x = v
            while True:
                p = parent[x]
                if p < 0:
                    break
                if geo.gap_to(c, p) > INNER:
                    acc.add(x)
                    break
                x = p
        out[c] = acc
    return out


def compute_access_nodes(net: RoadNetwork, grid: Grid, cell: int) -> AccessNodeSet:
    """Access nodes of one cell, with dist(v, a) for each vertex v of the cell."""
    geo = _Geometry(net, grid)
    if cell not in geo.cells:
        return AccessNodeSet(cell, ())
    vout = geo.v_out(cell)
    if not vout:
        return AccessNodeSet(cell, ())
    nodes = set()
    for u in vout:
        nodes |= _backward(net, geo, u, [cell])[cell]
    fwd, _ = _forward(net, geo, cell, vout)
    nodes |= fwd
    acc = tuple(sorted(nodes))
    dist = {}
    for v in geo.cells[cell]:
        d, _, _ = grow_tree(net, v, targets=acc)
        dist[v] = tuple(d[a] for a in acc)
    return AccessNodeSet(cell, acc, dist)


_WORKER = None


def _worker_init(net, grid):
    global _WORKER
    _WORKER = (net, _Geometry(net, grid))


def _backward_chunk(items):
    net, geo = _WORKER
    return [(u, _backward(net, geo, u, cells)) for u, cells in items]


def _forward_chunk(items):
    net, geo = _WORKER
    out = []
    for cell, vout, back in items:
        fwd, dists = _forward(net, geo, cell, vout, back)
        acc = tuple(sorted(fwd | back))
        rows = {}
        for v in geo.cells[cell]:
            d = dists[v]
            missing = [a for a in acc if a not in d]
            if missing:
                d = dict(d)
                d.update(grow_tree(net, v, targets=missing)[0])
            rows[v] = tuple(d[a] for a in acc)
        out.append(AccessNodeSet(cell, acc, rows))
    return out


def _chunks(items, size):
    return [items[i:i + size] for i in range(0, len(items), size)]


def compute_all_access_nodes(net: RoadNetwork, grid: Grid, workers: int = 1) -> dict[int, AccessNodeSet]:
    """Access sets of every non-empty cell; one backward tree per boundary vertex."""
    global _WORKER
    geo = _Geometry(net, grid)
    cells = sorted(geo.cells)
    vouts = {c: geo.v_out(c) for c in cells}
    by_u: dict[int, list[int]] = {}
    for c in cells:
        for u in vouts[c]:
            by_u.setdefault(u, []).append(c)
    back_items = sorted(by_u.items())
    fwd_base = [c for c in cells if vouts[c]]

    pool = ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(net, grid)) if workers > 1 else None
    try:
        run = pool.map if pool else map
        if pool is None:
            _WORKER = (net, geo)
        back: dict[int, set[int]] = {c: set() for c in cells}
        for part in run(_backward_chunk, _chunks(back_items, 64)):
            for _, per_cell in part:
                for c, acc in per_cell.items():
                    back[c] |= acc
        items = [(c, vouts[c], back[c]) for c in fwd_base]
        out: dict[int, AccessNodeSet] = {}
        for part in run(_forward_chunk, _chunks(items, 16)):
            for a in part:
                out[a.cell] = a
    finally:
        if pool is not None:
            pool.shutdown()
        _WORKER = None
    for c in cells:
        out.setdefault(c, AccessNodeSet(c, (), {v: () for v in geo.cells[c]}))
    return out


# -- index --------------------------------------------------------------------

class TNRIndex:
    """Grid, access sets, vertex->access (I_2) and access<->access (I_1) distances."""

    def __init__(self, net: RoadNetwork, grid: Grid, access: dict[int, AccessNodeSet],
                 table: np.ndarray, fallback_kind: str = "ch", fallback: CHIndex | None = None):
        self.net = net
        self.grid = grid
        self.access = access
        self.nodes = np.array(sorted({a for s in access.values() for a in s.nodes}), dtype=np.int64)
        self.table = table  # I_1 over self.nodes, symmetric
        pos = {a: i for i, a in enumerate(self.nodes.tolist())}
        self._cell = grid.cell.tolist()
        self._cx = grid.cx.tolist()
        self._cy = grid.cy.tolist()
        self._cell_idx = {c: np.array([pos[a] for a in s.nodes], dtype=np.int64) for c, s in access.items()}
        self._vd: list[np.ndarray | None] = [None] * net.n
        for s in access.values():
            for v, row in s.dist.items():
                self._vd[v] = np.array(row, dtype=np.int64)
        if fallback_kind not in ("ch", "bidijkstra"):
            raise ContractViolation(f"unknown fallback {fallback_kind!r}")
        self.fallback_kind = fallback_kind
        self.fallback = fallback
        if fallback_kind == "ch" and fallback is None:
            self.fallback = build_ch(net)
        # bound once: local queries should cost what the fallback costs
        if fallback_kind == "ch":
            self._fallback_distance = self.fallback.distance
            self._fallback_path = self.fallback.path

    @property
    def num_access_nodes(self) -> int:
        return len(self.nodes)

    def mean_access_per_cell(self) -> float:
        sizes = [len(s.nodes) for s in self.access.values()]
        return float(np.mean(sizes)) if sizes else 0.0

    def locality(self, s: int, t: int) -> Locality:
        return Locality(max(abs(self._cx[s] - self._cx[t]), abs(self._cy[s] - self._cy[t])))

    def _fallback_distance(self, s: int, t: int) -> int:
        if self.fallback_kind == "ch":
            return self.fallback.distance(s, t)
        return bidi_query(self.net, s, t)[0]

    def _fallback_path(self, s: int, t: int) -> Path:
        if self.fallback_kind == "ch":
            return self.fallback.path(s, t)
        return bidi_query(self.net, s, t)[1]

    def table_distance(self, s: int, t: int) -> int:
        """Eq.-style minimum over A_s x A_t; only meaningful for far pairs."""
        ia = self._cell_idx[self._cell[s]]
        ib = self._cell_idx[self._cell[t]]
        if not len(ia) or not len(ib):
            return INF
        tot = self._vd[s][:, None] + self.table[np.ix_(ia, ib)] + self._vd[t][None, :]
        return int(tot.min())

    def distance(self, s: int, t: int) -> int:
        cx, cy = self._cx, self._cy
        if abs(cx[s] - cx[t]) >= DIST_GAP or abs(cy[s] - cy[t]) >= DIST_GAP:
            return self.table_distance(s, t)
        return self._fallback_distance(s, t)

    def path(self, s: int, t: int) -> Path:
        if s == t:
            return Path.trivial(s)
        net = self.net
        cx, cy = self._cx, self._cy
        tx, ty = cx[t], cy[t]
        c = s
        verts = [s]
        length = 0
        while max(abs(cx[c] - tx), abs(cy[c] - ty)) >= PATH_GAP:
            best = None
            for x, w in zip(net.nbrs[c], net.wts[c]):
                val = w + self.distance(x, t)
                if best is None or val < best[0]:
                    best = (val, x, w)
            _, x, w = best
            verts.append(x)
            length += w
            c = x
        head = Path(tuple(verts), length)
        return path_concat(head, self._fallback_path(c, t))


def access_table(net: RoadNetwork, nodes: np.ndarray, batch_arcs: int = 1 << 24) -> np.ndarray:
    """Dense symmetric distance matrix between ``nodes``."""
    k = len(nodes)
    maxd = int(net.edges[:, 2].sum()) if net.num_edges else 0
    dtype = np.uint32 if maxd < np.iinfo(np.uint32).max else np.int64
    out = np.zeros((k, k), dtype=dtype)
    if not k:
        return out
    if net.has_zero_weights:
        from .baseline import sssp
        for i, a in enumerate(nodes.tolist()):
            out[i] = np.asarray(sssp(net, a).dist)[nodes]
        return out
    step = max(1, batch_arcs // max(1, net.n))
    for lo in range(0, k, step):
        d = _scipy_dijkstra(net.csr(), directed=True, indices=nodes[lo:lo + step])
        out[lo:lo + step] = d[:, nodes].astype(dtype)
    return out


def build_tnr_from_access(net: RoadNetwork, grid: Grid, access: dict[int, AccessNodeSet],
                          fallback_kind: str = "ch", fallback: CHIndex | None = None) -> TNRIndex:
    nodes = np.array(sorted({a for s in access.values() for a in s.nodes}), dtype=np.int64)
    table = access_table(net, nodes)
    return TNRIndex(net, grid, access, table, fallback_kind, fallback)


def build_tnr(net: RoadNetwork, grid: Grid, fallback_kind: str = "ch",
              fallback: CHIndex | None = None, workers: int = 1) -> TNRIndex:
    access = compute_all_access_nodes(net, grid, workers)
    return build_tnr_from_access(net, grid, access, fallback_kind, fallback)


def tnr_distance(idx: TNRIndex, s: int, t: int) -> int:
    return idx.distance(s, t)


def tnr_path(idx: TNRIndex, net: RoadNetwork, s: int, t: int) -> Path:
    if net is not idx.net and net.fingerprint() != idx.net.fingerprint():
        raise ContractViolation("index was built for a different network")
    return idx.path(s, t)
