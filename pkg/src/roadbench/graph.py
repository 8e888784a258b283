"""Road-network representation, DIMACS I/O and path primitives.

Every method in the package works on a :class:`RoadNetwork`: an undirected,
connected, degree-bounded graph with dense zero-based vertex ids, non-negative
integer travel-time weights and integer planar coordinates per vertex.
"""
from __future__ import annotations

import hashlib
import logging
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)

# Larger than any sum of n max-weight (32-bit) edges for n < 2**30.
INF = 1 << 62
DEFAULT_MAX_DEGREE = 16


class DimacsError(ValueError):
    """Malformed or inconsistent DIMACS input."""


class ContractViolation(ValueError):
    """A caller broke an operation precondition."""


class IndexCorruption(RuntimeError):
    """An index failed to satisfy its own build postcondition at query time."""


@dataclass(frozen=True)
class BoundingBox:
    min_x: int
    min_y: int
    max_x: int
    max_y: int

    @property
    def width(self) -> int:
        return self.max_x - self.min_x

    @property
    def height(self) -> int:
        return self.max_y - self.min_y

    def contains(self, x, y) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    @classmethod
    def of(cls, coords: np.ndarray) -> "BoundingBox":
        if len(coords) == 0:
            return cls(0, 0, 0, 0)
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        return cls(int(lo[0]), int(lo[1]), int(hi[0]), int(hi[1]))


@dataclass(frozen=True)
class Path:
    """A walk s .. t through the network; ``length`` is the sum of its edge weights."""

    vertices: tuple[int, ...]
    length: int

    @property
    def k(self) -> int:
        return len(self.vertices) - 1

    @property
    def source(self) -> int:
        return self.vertices[0]

    @property
    def target(self) -> int:
        return self.vertices[-1]

    @classmethod
    def trivial(cls, v: int) -> "Path":
        return cls((v,), 0)

    @classmethod
    def from_vertices(cls, net: "RoadNetwork", vertices: Sequence[int]) -> "Path":
        vertices = tuple(int(v) for v in vertices)
        length = 0
        for u, v in zip(vertices, vertices[1:]):
            w = net.weight(u, v)
            if w is None:
                raise ContractViolation(f"({u}, {v}) is not an edge")
            length += w
        return cls(vertices, length)


def path_concat(a: Path, b: Path) -> Path:
    if a.vertices[-1] != b.vertices[0]:
        raise ContractViolation(
            f"cannot join path ending at {a.vertices[-1]} with path starting at {b.vertices[0]}"
        )
    return Path(a.vertices + b.vertices[1:], a.length + b.length)


def check_path(net: "RoadNetwork", path: Path, s: int | None = None, t: int | None = None) -> None:
    """Raise ``ContractViolation`` unless ``path`` is a well-formed walk with a consistent length."""
    if not path.vertices:
        raise ContractViolation("empty path")
    if s is not None and path.source != s:
        raise ContractViolation(f"path starts at {path.source}, expected {s}")
    if t is not None and path.target != t:
        raise ContractViolation(f"path ends at {path.target}, expected {t}")
    total = 0
    for u, v in zip(path.vertices, path.vertices[1:]):
        w = net.weight(u, v)
        if w is None:
            raise ContractViolation(f"({u}, {v}) is not an edge")
        total += w
    if total != path.length:
        raise ContractViolation(f"path length {path.length} but edges sum to {total}")


class RoadNetwork:
    """Immutable undirected weighted graph with planar coordinates.

    Adjacency is held twice: as per-vertex Python lists (fast scalar access in
    the pure-Python searches) and as CSR arrays (for vectorised work and
    scipy). Neighbor lists are sorted by vertex id.
    """

    def __init__(self, n: int, edges: np.ndarray, coords: np.ndarray,
                 original_ids: np.ndarray | None = None, stats: dict | None = None):
        # edges: (m, 3) array of unique undirected (u, v, w) with u < v
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 3)
        self.n = int(n)
        self.coords = np.asarray(coords, dtype=np.int64).reshape(self.n, 2)
        self.coords.setflags(write=False)
        if original_ids is None:
            original_ids = np.arange(1, self.n + 1, dtype=np.int64)
        self.original_ids = np.asarray(original_ids, dtype=np.int64)
        self.stats = dict(stats or {})

        order = np.lexsort((edges[:, 1], edges[:, 0]))
        self.edges = edges[order]
        self.edges.setflags(write=False)

        u, v, w = self.edges[:, 0], self.edges[:, 1], self.edges[:, 2]
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        wts = np.concatenate([w, w])
        arc_order = np.lexsort((cols, rows))
        self.arc_src = rows[arc_order]
        self.arc_dst = cols[arc_order]
        self.arc_w = wts[arc_order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.arc_src, minlength=self.n), out=self.indptr[1:])

        dst_list = self.arc_dst.tolist()
        w_list = self.arc_w.tolist()
        ptr = self.indptr.tolist()
        self.nbrs: list[list[int]] = [dst_list[ptr[i]:ptr[i + 1]] for i in range(self.n)]
        self.wts: list[list[int]] = [w_list[ptr[i]:ptr[i + 1]] for i in range(self.n)]
        self._wmap: list[dict[int, int]] | None = None
        self._csr = None
        self._fingerprint = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]], coords,
                   original_ids=None, stats: dict | None = None) -> "RoadNetwork":
        """Normalise an arbitrary edge list: drop self-loops, keep min weight per pair."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 3)
        if len(arr) and (arr[:, :2].min() < 0 or arr[:, :2].max() >= n):
            raise ContractViolation("edge endpoint out of range")
        if len(arr) and arr[:, 2].min() < 0:
            raise ContractViolation("negative edge weight")
        arr = arr[arr[:, 0] != arr[:, 1]]
        a = np.minimum(arr[:, 0], arr[:, 1])
        b = np.maximum(arr[:, 0], arr[:, 1])
        arr = np.stack([a, b, arr[:, 2]], axis=1)
        if len(arr):
            order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
            arr = arr[order]
            keep = np.ones(len(arr), dtype=bool)
            keep[1:] = (arr[1:, 0] != arr[:-1, 0]) | (arr[1:, 1] != arr[:-1, 1])
            arr = arr[keep]
        if coords is None:
            coords = np.zeros((n, 2), dtype=np.int64)
        return cls(n, arr, coords, original_ids=original_ids, stats=stats)

    # -- queries ------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_arcs(self) -> int:
        return 2 * len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.nbrs[v])

    @property
    def max_degree(self) -> int:
        return int(np.diff(self.indptr).max()) if self.n else 0

    def neighbors(self, v: int) -> Iterator[tuple[int, int]]:
        return zip(self.nbrs[v], self.wts[v])

    def weight(self, u: int, v: int) -> int | None:
        if self._wmap is None:
            self._wmap = [dict(zip(nb, wt)) for nb, wt in zip(self.nbrs, self.wts)]
        return self._wmap[u].get(v)

    @property
    def bbox(self) -> BoundingBox:
        return BoundingBox.of(self.coords)

    def csr(self) -> csr_matrix:
        if self._csr is None:
            self._csr = csr_matrix(
                (self.arc_w.astype(np.float64), self.arc_dst, self.indptr),
                shape=(self.n, self.n))
        return self._csr

    @property
    def has_zero_weights(self) -> bool:
        return bool(len(self.edges)) and int(self.edges[:, 2].min()) == 0

    def fingerprint(self) -> int:
        """64-bit hash over the sorted (u, v, w) triples, u < v."""
        if self._fingerprint is None:
            h = hashlib.blake2b(digest_size=8)
            h.update(np.int64(self.n).astype("<i8").tobytes())
            h.update(np.ascontiguousarray(self.edges, dtype="<i8").tobytes())
            self._fingerprint = int.from_bytes(h.digest(), "little")
        return self._fingerprint

    def subgraph(self, vertices: Sequence[int]) -> "RoadNetwork":
        """Induced subgraph on ``vertices`` with ids remapped in ascending order."""
        keep = np.zeros(self.n, dtype=bool)
        keep[np.asarray(vertices, dtype=np.int64)] = True
        new_id = np.full(self.n, -1, dtype=np.int64)
        new_id[keep] = np.arange(int(keep.sum()))
        e = self.edges
        mask = keep[e[:, 0]] & keep[e[:, 1]]
        sub = e[mask].copy()
        sub[:, 0] = new_id[sub[:, 0]]
        sub[:, 1] = new_id[sub[:, 1]]
        return RoadNetwork(int(keep.sum()), sub, self.coords[keep],
                           original_ids=self.original_ids[keep])

    def largest_component(self) -> "RoadNetwork":
        if self.n == 0:
            return self
        ncomp, labels = connected_components(self.csr(), directed=False)
        if ncomp == 1:
            return self
        sizes = np.bincount(labels)
        big = int(np.argmax(sizes))
        return self.subgraph(np.flatnonzero(labels == big))

    def __repr__(self) -> str:
        return f"RoadNetwork(n={self.n}, edges={self.num_edges})"


# -- DIMACS ---------------------------------------------------------------

def _open_text(src) -> TextIO:
    # file-like objects pass through; anything else is a filesystem path
    if hasattr(src, "read"):
        return src
    return open(os.fspath(src), "r")


def _parse_gr(stream: TextIO):
    n = m = None
    arcs = []
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line[0] == "c":
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "sp":
                raise DimacsError(f"line {lineno}: bad problem line {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: bad problem line {line!r}") from None
        elif parts[0] == "a":
            if n is None:
                raise DimacsError(f"line {lineno}: arc before problem line")
            if len(parts) != 4:
                raise DimacsError(f"line {lineno}: malformed arc {line!r}")
            try:
                u, v, w = int(parts[1]), int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed arc {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: vertex id out of range 1..{n}")
            if w < 0 or w >= 1 << 32:
                raise DimacsError(f"line {lineno}: weight {w} outside 32-bit unsigned range")
            arcs.append((u - 1, v - 1, w))
        else:
            raise DimacsError(f"line {lineno}: unknown record {parts[0]!r}")
    if n is None:
        raise DimacsError("missing problem line")
    return n, m, np.asarray(arcs, dtype=np.int64).reshape(-1, 3)


def _parse_co(stream: TextIO, n: int):
    coords = np.zeros((n, 2), dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for lineno, line in enumerate(stream, 1):
        line = line.strip()
        if not line or line[0] == "c" or line[0] == "p":
            if line.startswith("p"):
                parts = line.split()
                if len(parts) >= 5 and int(parts[-1]) != n:
                    raise DimacsError(f"line {lineno}: coordinate file has {parts[-1]} vertices, graph has {n}")
            continue
        parts = line.split()
        if parts[0] != "v" or len(parts) != 4:
            raise DimacsError(f"line {lineno}: malformed coordinate line {line!r}")
        try:
            vid, x, y = int(parts[1]), int(parts[2]), int(parts[3])
        except ValueError:
            raise DimacsError(f"line {lineno}: malformed coordinate line {line!r}") from None
        if not 1 <= vid <= n:
            raise DimacsError(f"line {lineno}: vertex id {vid} out of range 1..{n}")
        coords[vid - 1] = (x, y)
        seen[vid - 1] = True
    return coords, seen


def load_dimacs(gr_stream, co_stream=None, max_degree: int = DEFAULT_MAX_DEGREE) -> RoadNetwork:
    """Load a DIMACS ``.gr``/``.co`` pair into a normalised :class:`RoadNetwork`.

    Arcs are symmetrised with the minimum weight kept per unordered pair,
    self-loops are dropped and the result is restricted to its largest
    connected component. ``stats`` on the returned network records the raw
    arc count, the undirected edge count before the component restriction and
    the number of asymmetric arc pairs.
    """
    gr = _open_text(gr_stream)
    try:
        n, m, arcs = _parse_gr(gr)
    finally:
        if gr is not gr_stream:
            gr.close()

    asym = 0
    if len(arcs):
        a = np.minimum(arcs[:, 0], arcs[:, 1])
        b = np.maximum(arcs[:, 0], arcs[:, 1])
        fwd = arcs[:, 0] < arcs[:, 1]
        key = a * n + b
        # pairs whose two directions disagree on weight
        wf = {}
        wb = {}
        for k, f, w in zip(key.tolist(), fwd.tolist(), arcs[:, 2].tolist()):
            d = wf if f else wb
            if k not in d or w < d[k]:
                d[k] = w
        asym = sum(1 for k, w in wf.items() if k in wb and wb[k] != w)
        if asym:
            log.warning("%d arc pairs have asymmetric weights; kept the minimum", asym)

    if co_stream is not None:
        co = _open_text(co_stream)
        try:
            coords, seen = _parse_co(co, n)
        finally:
            if co is not co_stream:
                co.close()
    else:
        coords, seen = np.zeros((n, 2), dtype=np.int64), np.ones(n, dtype=bool)

    full = RoadNetwork.from_edges(n, arcs, coords, original_ids=np.arange(1, n + 1),
                                  stats={"raw_arcs": int(len(arcs)), "declared_arcs": m,
                                         "asymmetric_pairs": asym})
    undirected = full.num_edges
    net = full.largest_component()
    missing = ~seen[net.original_ids - 1]
    if missing.any():
        bad = int(net.original_ids[np.argmax(missing)])
        raise DimacsError(f"no coordinates for vertex {bad}")
    net.stats.update(full.stats)
    net.stats.update({"undirected_edges": undirected, "dropped_vertices": n - net.n})
    if net.max_degree > max_degree:
        raise DimacsError(f"max degree {net.max_degree} exceeds bound {max_degree}")
    return net


def write_dimacs(net: RoadNetwork, gr_out: TextIO, co_out: TextIO | None = None,
                 original_ids: bool = True) -> None:
    """Write ``net`` as DIMACS; each undirected edge becomes two arcs."""
    ids = net.original_ids if original_ids else np.arange(1, net.n + 1)
    nmax = int(ids.max()) if net.n else 0
    gr_out.write(f"p sp {nmax} {2 * net.num_edges}\n")
    for u, v, w in net.edges.tolist():
        gr_out.write(f"a {ids[u]} {ids[v]} {w}\na {ids[v]} {ids[u]} {w}\n")
    if co_out is not None:
        co_out.write(f"p aux sp co {nmax}\n")
        for i in range(net.n):
            x, y = net.coords[i]
            co_out.write(f"v {ids[i]} {x} {y}\n")


# -- diagnostics ------------------------------------------------------------

@dataclass
class ValidationReport:
    n: int
    num_edges: int
    symmetric: bool
    connected: bool
    components: int
    max_degree: int
    degree_bound: int
    self_loops: int
    duplicate_coords: int
    zero_weight_edges: int
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def validate(net: RoadNetwork, degree_bound: int = DEFAULT_MAX_DEGREE) -> ValidationReport:
    """Scan ``net`` for invariant violations; reports, never raises."""
    symmetric = True
    for u in range(net.n):
        for v, w in net.neighbors(u):
            if net.weight(v, u) != w:
                symmetric = False
                break
        if not symmetric:
            break
    ncomp = connected_components(net.csr(), directed=False)[0] if net.n else 0
    self_loops = sum(1 for u in range(net.n) if u in net.nbrs[u])
    if net.n:
        _, counts = np.unique(net.coords, axis=0, return_counts=True)
        dup = int((counts[counts > 1]).sum())
    else:
        dup = 0
    zero_w = int((net.edges[:, 2] == 0).sum()) if net.num_edges else 0
    rep = ValidationReport(net.n, net.num_edges, symmetric, ncomp <= 1, int(ncomp),
                           net.max_degree, degree_bound, self_loops, dup, zero_w)
    if not symmetric:
        rep.problems.append("adjacency not symmetric")
    if ncomp > 1:
        rep.problems.append(f"not connected ({ncomp} components)")
    if rep.max_degree > degree_bound:
        rep.problems.append(f"max degree {rep.max_degree} exceeds {degree_bound}")
    if self_loops:
        rep.problems.append(f"{self_loops} self-loops")
    if zero_w:
        warnings.warn("zero-weight edges weaken canonical tie-breaking guarantees")
    return rep
