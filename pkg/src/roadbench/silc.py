"""SILC: per-source first-hop partitions stored as coloured Z-curve intervals.

For source ``s`` every other vertex is coloured by the first hop of the
canonical shortest path from ``s``. A quadtree over the quantised plane is
refined until each square is monochrome; each leaf square is one Z-interval.
A path query repeatedly looks up the hop towards ``t`` and moves there.
"""
from __future__ import annotations

import bisect
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baseline import canonical_trees, first_hops_from_parents, sssp
from .graph import ContractViolation, IndexCorruption, Path, RoadNetwork
from .morton import DEFAULT_BITS, Quantizer, square_interval

log = logging.getLogger(__name__)


@dataclass
class ColoredIntervalMap:
    source: int
    lo: np.ndarray
    hi: np.ndarray
    color: np.ndarray
    exceptions: dict[int, int]

    def lookup(self, code: int, vertex: int) -> int:
        if vertex in self.exceptions:
            return self.exceptions[vertex]
        i = int(np.searchsorted(self.lo, code, side="right")) - 1
        if i < 0 or code > self.hi[i]:
            raise IndexCorruption(f"vertex {vertex} not covered in map of {self.source}")
        return int(self.color[i])


def first_hop_partition(net: RoadNetwork, v: int) -> dict[int, int]:
    """Target -> neighbour of ``v`` starting the canonical shortest path."""
    st = sssp(net, v)
    hop = [-1] * net.n
    for x in st.order[1:]:
        p = st.parent[x]
        hop[x] = x if p == v else hop[p]
    return {x: hop[x] for x in range(net.n) if x != v}


def _leaves(codes: np.ndarray, colors: np.ndarray, vertices: np.ndarray, bits: int):
    """Monochrome quadtree leaves over code-sorted points.

    Returns interval arrays (lo, hi, color) sorted by lo, with contiguous
    same-colour intervals merged, plus exception pairs for distinct colours
    sharing one quantised point.
    """
    los, his, cols = [], [], []
    ex_v, ex_c = [], []
    act = np.arange(len(codes))
    for d in range(bits + 1):
        if not len(act):
            break
        shift = 2 * (bits - d)
        pref = codes[act] >> shift
        starts = np.flatnonzero(np.r_[True, pref[1:] != pref[:-1]])
        c = colors[act]
        cmin = np.minimum.reduceat(c, starts)
        cmax = np.maximum.reduceat(c, starts)
        mono = cmin == cmax
        if d == bits:
            # collisions: the first vertex's colour takes the interval
            first = c[starts]
            mono[:] = True
            cmin = first
            sizes = np.diff(np.r_[starts, len(act)])
            own = np.repeat(first, sizes)
            bad = c != own
            ex_v.append(vertices[act[bad]])
            ex_c.append(c[bad])
        p = pref[starts[mono]]
        los.append(p << shift)
        his.append(((p + 1) << shift) - 1)
        cols.append(cmin[mono])
        sizes = np.diff(np.r_[starts, len(act)])
        act = act[np.repeat(~mono, sizes)]
    lo = np.concatenate(los) if los else np.zeros(0, np.int64)
    hi = np.concatenate(his) if his else np.zeros(0, np.int64)
    col = np.concatenate(cols) if cols else np.zeros(0, np.int64)
    order = np.argsort(lo, kind="stable")
    lo, hi, col = lo[order], hi[order], col[order]
    if len(lo) > 1:
        head = np.r_[True, (col[1:] != col[:-1]) | (lo[1:] != hi[:-1] + 1)]
        idx = np.flatnonzero(head)
        end = np.r_[idx[1:], len(lo)] - 1
        lo, hi, col = lo[idx], hi[end], col[idx]
    exv = np.concatenate(ex_v) if ex_v else np.zeros(0, np.int64)
    exc = np.concatenate(ex_c) if ex_c else np.zeros(0, np.int64)
    return lo, hi, col, exv, exc


def build_interval_map(partition: dict[int, int], coords: np.ndarray, bits: int = DEFAULT_BITS,
                       source: int = -1, quantizer: Quantizer | None = None) -> ColoredIntervalMap:
    q = quantizer or Quantizer.for_coords(coords, bits)
    codes = q.codes(coords)
    verts = np.array(sorted(partition), dtype=np.int64)
    colors = np.array([partition[x] for x in verts.tolist()], dtype=np.int64)
    order = np.lexsort((verts, codes[verts]))
    lo, hi, col, exv, exc = _leaves(codes[verts[order]], colors[order], verts[order], q.bits)
    return ColoredIntervalMap(source, lo, hi, col, dict(zip(exv.tolist(), exc.tolist())))


def _build_rows(net: RoadNetwork, sources: np.ndarray, codes: np.ndarray, order: np.ndarray, bits: int):
    """Interval data for a block of sources (runs in worker processes too)."""
    _, parent = canonical_trees(net, sources)
    hops = first_hops_from_parents(parent, sources)
    out = []
    sorted_codes = codes[order]
    for row, s in enumerate(sources.tolist()):
        keep = order != s
        col = hops[row][order][keep]
        out.append(_leaves(sorted_codes[keep], col, order[keep], bits))
    return out


_WORKER_NET = None


def _worker_init(net):
    global _WORKER_NET
    _WORKER_NET = net


def _worker_rows(args):
    sources, codes, order, bits = args
    return _build_rows(_WORKER_NET, sources, codes, order, bits)


class SILCIndex:
    def __init__(self, quantizer: Quantizer, codes: np.ndarray, offsets: np.ndarray,
                 lo: np.ndarray, hi: np.ndarray, color: np.ndarray,
                 ex_offsets: np.ndarray, ex_vertex: np.ndarray, ex_color: np.ndarray):
        self.quantizer = quantizer
        self.codes = np.asarray(codes, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.lo = np.asarray(lo, dtype=np.int64)
        self.hi = np.asarray(hi, dtype=np.int64)
        self.color = np.asarray(color, dtype=np.int64)
        self.ex_offsets = np.asarray(ex_offsets, dtype=np.int64)
        self.ex_vertex = np.asarray(ex_vertex, dtype=np.int64)
        self.ex_color = np.asarray(ex_color, dtype=np.int64)
        self.n = len(self.codes)
        # Python lists make the per-hop bisect cheaper than numpy calls
        self._code = self.codes.tolist()
        self._lo = self.lo.tolist()
        self._hi = self.hi.tolist()
        self._col = self.color.tolist()
        self._off = self.offsets.tolist()
        self._ex: dict[int, dict[int, int]] = {}
        exo = self.ex_offsets.tolist()
        exv, exc = self.ex_vertex.tolist(), self.ex_color.tolist()
        for s in range(self.n):
            if exo[s + 1] > exo[s]:
                self._ex[s] = dict(zip(exv[exo[s]:exo[s + 1]], exc[exo[s]:exo[s + 1]]))

    @property
    def num_intervals(self) -> int:
        return len(self.lo)

    def interval_map(self, s: int) -> ColoredIntervalMap:
        a, b = self._off[s], self._off[s + 1]
        return ColoredIntervalMap(s, self.lo[a:b], self.hi[a:b], self.color[a:b], dict(self._ex.get(s, {})))

    def lookup_first_hop(self, s: int, t: int) -> int:
        if s == t:
            raise ContractViolation("first hop of a vertex to itself")
        ex = self._ex.get(s)
        if ex is not None and t in ex:
            return ex[t]
        code = self._code[t]
        i = bisect.bisect_right(self._lo, code, self._off[s], self._off[s + 1]) - 1
        if i < self._off[s] or code > self._hi[i]:
            raise IndexCorruption(f"vertex {t} not covered in map of {s}")
        return self._col[i]

    def path(self, net: RoadNetwork, s: int, t: int) -> Path:
        if not (0 <= s < self.n and 0 <= t < self.n):
            raise ContractViolation("query vertex out of range")
        verts = [s]
        length = 0
        c = s
        weight = net.weight
        while c != t:
            h = self.lookup_first_hop(c, t)
            w = weight(c, h)
            if w is None or len(verts) > self.n:
                raise IndexCorruption(f"broken hop chain {s}->{t} at {c}")
            length += w
            verts.append(h)
            c = h
        return Path(tuple(verts), length)

    def distance(self, net: RoadNetwork, s: int, t: int) -> int:
        return self.path(net, s, t).length


def build_silc(net: RoadNetwork, bits: int = DEFAULT_BITS, workers: int = 1,
               block: int = 256) -> SILCIndex:
    if net.n > 1_000_000:
        log.warning("SILC stores one map per vertex; n=%d will need a lot of memory", net.n)
    q = Quantizer.for_coords(net.coords, bits)
    codes = q.codes(net.coords)
    order = np.lexsort((np.arange(net.n), codes))
    blocks = [np.arange(a, min(a + block, net.n)) for a in range(0, net.n, block)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(net,)) as pool:
            results = list(pool.map(_worker_rows, [(b, codes, order, bits) for b in blocks]))
    else:
        results = [_build_rows(net, b, codes, order, bits) for b in blocks]
    rows = [r for chunk in results for r in chunk]
    counts = np.array([len(r[0]) for r in rows], dtype=np.int64)
    ex_counts = np.array([len(r[3]) for r in rows], dtype=np.int64)
    offsets = np.r_[0, np.cumsum(counts)]
    ex_offsets = np.r_[0, np.cumsum(ex_counts)]
    cat = lambda k: np.concatenate([r[k] for r in rows]) if rows else np.zeros(0, np.int64)
    return SILCIndex(q, codes, offsets, cat(0), cat(1), cat(2), ex_offsets, cat(3), cat(4))


def lookup_first_hop(idx: SILCIndex, s: int, t: int) -> int:
    return idx.lookup_first_hop(s, t)


def silc_path(idx: SILCIndex, net: RoadNetwork, s: int, t: int) -> Path:
    return idx.path(net, s, t)


def silc_distance(idx: SILCIndex, net: RoadNetwork, s: int, t: int) -> int:
    return idx.distance(net, s, t)
