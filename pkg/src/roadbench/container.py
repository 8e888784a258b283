"""Binary index container.

Layout: magic ``RBIDX1``, u16 format version, u8 method tag, u64 graph
fingerprint, then the method payload. Every integer is little-endian and
fixed-width; arrays are written as a u64 element count followed by the raw
elements. Loading needs the network the index was built for and rejects any
other network by fingerprint.
"""
from __future__ import annotations

import io
import os
import struct

import numpy as np

from .ch import NO_MIDDLE, CHIndex
from .graph import BoundingBox, IndexCorruption, RoadNetwork
from .morton import Quantizer
from .pcpd import PCPSet
from .silc import SILCIndex
from .tnr import AccessNodeSet, Grid, TNRIndex, build_grid

MAGIC = b"RBIDX1"
VERSION = 1
TAGS = {"ch": 1, "tnr": 2, "silc": 3, "pcpd": 4}
METHODS = {v: k for k, v in TAGS.items()}
U32_NONE = 0xFFFFFFFF

CH_ARC = np.dtype([("a", "<u4"), ("b", "<u4"), ("w", "<u8"), ("m", "<u4")])
PCP_REC = np.dtype([("d", "u1"), ("x", "<u8"), ("y", "<u8"), ("k", "u1"), ("a", "<u4"), ("b", "<u4")])
PCP_EXC = np.dtype([("s", "<u4"), ("t", "<u4"), ("k", "u1"), ("a", "<u4"), ("b", "<u4")])


class FingerprintMismatch(IndexCorruption):
    pass


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def u(self, fmt: str, *vals) -> None:
        self.buf.write(struct.pack("<" + fmt, *vals))

    def array(self, arr, dtype) -> None:
        a = np.ascontiguousarray(arr, dtype=dtype)
        self.u("Q", len(a))
        self.buf.write(a.tobytes())

    def blob(self, data: bytes) -> None:
        self.u("Q", len(data))
        self.buf.write(data)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def u(self, fmt: str):
        fmt = "<" + fmt
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IndexCorruption("truncated container")
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals if len(vals) > 1 else vals[0]

    def array(self, dtype) -> np.ndarray:
        n = self.u("Q")
        dt = np.dtype(dtype)
        end = self.pos + n * dt.itemsize
        if end > len(self.data):
            raise IndexCorruption("truncated container")
        a = np.frombuffer(self.data, dtype=dt, count=n, offset=self.pos)
        self.pos = end
        return a

    def blob(self) -> bytes:
        n = self.u("Q")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out


def _dist_dtype(values: np.ndarray):
    return "<u4" if not len(values) or int(values.max()) < U32_NONE else "<u8"


# -- per-method payloads --------------------------------------------------------

def _put_ch(w: _Writer, idx: CHIndex) -> None:
    w.u("I", idx.n)
    w.array(idx.rank, "<u4")
    arcs = np.zeros(len(idx.arcs), dtype=CH_ARC)
    arcs["a"], arcs["b"], arcs["w"] = idx.arcs[:, 0], idx.arcs[:, 1], idx.arcs[:, 2]
    arcs["m"] = np.where(idx.arcs[:, 3] == NO_MIDDLE, U32_NONE, idx.arcs[:, 3])
    w.array(arcs, CH_ARC)


def _get_ch(r: _Reader, net: RoadNetwork) -> CHIndex:
    n = r.u("I")
    rank = r.array("<u4").astype(np.int64)
    arcs = r.array(CH_ARC)
    mid = arcs["m"].astype(np.int64)
    mid[mid == U32_NONE] = NO_MIDDLE
    table = np.stack([arcs["a"].astype(np.int64), arcs["b"].astype(np.int64),
                      arcs["w"].astype(np.int64), mid], axis=1) if len(arcs) else np.zeros((0, 4), np.int64)
    return CHIndex(n, rank, table)


def _put_tnr(w: _Writer, idx: TNRIndex) -> None:
    gr = idx.grid
    bb = gr.bbox
    w.u("I", gr.g)
    w.u("qqqq", bb.min_x, bb.min_y, bb.max_x, bb.max_y)
    w.u("B", 0 if idx.fallback_kind == "ch" else 1)
    cells = sorted(idx.access)
    w.array(cells, "<u4")
    w.array([len(idx.access[c].nodes) for c in cells], "<u4")
    w.array([a for c in cells for a in idx.access[c].nodes], "<u4")
    # I_2 as (v, a, d) triples, grouped by cell and vertex in access-list order
    tv, ta, td = [], [], []
    for c in cells:
        s = idx.access[c]
        for v in sorted(s.dist):
            for a, d in zip(s.nodes, s.dist[v]):
                tv.append(v)
                ta.append(a)
                td.append(d)
    td = np.asarray(td, dtype=np.int64)
    dt = _dist_dtype(td)
    trip = np.zeros(len(tv), dtype=[("v", "<u4"), ("a", "<u4"), ("d", dt)])
    trip["v"], trip["a"], trip["d"] = tv, ta, td
    w.u("B", np.dtype(dt).itemsize)
    w.array(trip, trip.dtype)
    # I_1: strict upper triangle of the symmetric table, row by row
    k = len(idx.nodes)
    table = np.asarray(idx.table)
    dt = _dist_dtype(np.array([table.max()]) if k else np.zeros(0, np.int64))
    w.u("B", np.dtype(dt).itemsize)
    w.u("Q", k * (k - 1) // 2)
    for i in range(k - 1):
        w.buf.write(np.ascontiguousarray(table[i, i + 1:], dtype=dt).tobytes())
    if idx.fallback_kind == "ch":
        sub = _Writer()
        _put_ch(sub, idx.fallback)
        w.blob(sub.buf.getvalue())


def _get_tnr(r: _Reader, net: RoadNetwork) -> TNRIndex:
    g = r.u("I")
    bb = BoundingBox(*r.u("qqqq"))
    kind = "ch" if r.u("B") == 0 else "bidijkstra"
    grid = build_grid(net, g, bb)
    cells = r.array("<u4").tolist()
    counts = r.array("<u4").tolist()
    flat = r.array("<u4").tolist()
    width = r.u("B")
    trip = r.array([("v", "<u4"), ("a", "<u4"), ("d", "<u4" if width == 4 else "<u8")])
    access: dict[int, AccessNodeSet] = {}
    pos = 0
    members = grid.members()
    for c, k in zip(cells, counts):
        access[c] = AccessNodeSet(c, tuple(flat[pos:pos + k]), {})
        pos += k
    tv, td = trip["v"].tolist(), trip["d"].tolist()
    i = 0
    for c in cells:
        s = access[c]
        k = len(s.nodes)
        for v in members.get(c, []):
            if k:
                if tv[i] != v:
                    raise IndexCorruption("I_2 triples out of order")
                s.dist[v] = tuple(td[i:i + k])
                i += k
            else:
                s.dist[v] = ()
    width = r.u("B")
    upper = r.array("<u4" if width == 4 else "<u8")
    nodes = sorted({a for s in access.values() for a in s.nodes})
    kk = len(nodes)
    if len(upper) != kk * (kk - 1) // 2:
        raise IndexCorruption("I_1 size does not match the access-node count")
    table = np.zeros((kk, kk), dtype=np.uint32 if width == 4 else np.int64)
    pos = 0
    for i in range(kk - 1):
        row = upper[pos:pos + kk - 1 - i]
        table[i, i + 1:] = row
        table[i + 1:, i] = row
        pos += kk - 1 - i
    fallback = _get_ch(_Reader(r.blob()), net) if kind == "ch" else None
    return TNRIndex(net, grid, access, table, kind, fallback)


def _put_quantizer(w: _Writer, q: Quantizer) -> None:
    w.u("Bqqq", q.bits, q.min_x, q.min_y, q.span)


def _get_quantizer(r: _Reader) -> Quantizer:
    bits, mx, my, span = r.u("Bqqq")
    return Quantizer(bits, mx, my, span)


def _put_silc(w: _Writer, idx: SILCIndex) -> None:
    _put_quantizer(w, idx.quantizer)
    w.array(np.diff(idx.offsets), "<u4")
    w.array(idx.lo, "<u8")
    w.array(idx.hi, "<u8")
    w.array(idx.color, "<u4")
    w.array(np.diff(idx.ex_offsets), "<u4")
    w.array(idx.ex_vertex, "<u4")
    w.array(idx.ex_color, "<u4")


def _get_silc(r: _Reader, net: RoadNetwork) -> SILCIndex:
    q = _get_quantizer(r)
    counts = r.array("<u4").astype(np.int64)
    lo = r.array("<u8").astype(np.int64)
    hi = r.array("<u8").astype(np.int64)
    color = r.array("<u4").astype(np.int64)
    ex_counts = r.array("<u4").astype(np.int64)
    exv = r.array("<u4").astype(np.int64)
    exc = r.array("<u4").astype(np.int64)
    return SILCIndex(q, q.codes(net.coords), np.r_[0, np.cumsum(counts)], lo, hi, color,
                     np.r_[0, np.cumsum(ex_counts)], exv, exc)


def _put_pcpd(w: _Writer, pcp: PCPSet) -> None:
    _put_quantizer(w, pcp.quantizer)
    rec = np.zeros(len(pcp.records), dtype=PCP_REC)
    for i, name in enumerate("dxykab"):
        col = pcp.records[:, i]
        rec[name] = np.where(col < 0, U32_NONE, col) if name == "b" else col
    w.array(rec, PCP_REC)
    exc = np.zeros(len(pcp.exceptions), dtype=PCP_EXC)
    for i, name in enumerate("stkab"):
        col = pcp.exceptions[:, i]
        exc[name] = np.where(col < 0, U32_NONE, col) if name == "b" else col
    w.array(exc, PCP_EXC)


def _get_pcpd(r: _Reader, net: RoadNetwork) -> PCPSet:
    q = _get_quantizer(r)
    rec = r.array(PCP_REC)
    exc = r.array(PCP_EXC)

    def table(arr, names):
        cols = []
        for name in names:
            c = arr[name].astype(np.int64)
            if name == "b":
                c[c == U32_NONE] = -1
            cols.append(c)
        return np.stack(cols, axis=1) if len(arr) else np.zeros((0, len(names)), np.int64)

    return PCPSet(q, q.codes(net.coords), table(rec, "dxykab"), table(exc, "stkab"))


_PUT = {"ch": _put_ch, "tnr": _put_tnr, "silc": _put_silc, "pcpd": _put_pcpd}
_GET = {"ch": _get_ch, "tnr": _get_tnr, "silc": _get_silc, "pcpd": _get_pcpd}


def method_of(index) -> str:
    for name, cls in (("ch", CHIndex), ("tnr", TNRIndex), ("silc", SILCIndex), ("pcpd", PCPSet)):
        if isinstance(index, cls):
            return name
    raise TypeError(f"not an index: {type(index).__name__}")


def dumps(index, net: RoadNetwork) -> bytes:
    method = method_of(index)
    w = _Writer()
    w.buf.write(MAGIC)
    w.u("HBQ", VERSION, TAGS[method], net.fingerprint())
    _PUT[method](w, index)
    return w.buf.getvalue()


def loads(data: bytes, net: RoadNetwork):
    """Return ``(method, index)``."""
    if data[:len(MAGIC)] != MAGIC:
        raise IndexCorruption("not an index container")
    r = _Reader(data)
    r.pos = len(MAGIC)
    version, tag, fp = r.u("HBQ")
    if version != VERSION:
        raise IndexCorruption(f"unsupported container version {version}")
    if tag not in METHODS:
        raise IndexCorruption(f"unknown method tag {tag}")
    if fp != net.fingerprint():
        raise FingerprintMismatch("index was built for a different graph")
    method = METHODS[tag]
    return method, _GET[method](r, net)


def store(index, net: RoadNetwork, path) -> int:
    data = dumps(index, net)
    with open(os.fspath(path), "wb") as fh:
        fh.write(data)
    return len(data)


def load(path, net: RoadNetwork):
    with open(os.fspath(path), "rb") as fh:
        return loads(fh.read(), net)


def peek(path) -> tuple[str, int]:
    """Method and fingerprint without decoding the payload."""
    with open(os.fspath(path), "rb") as fh:
        head = fh.read(len(MAGIC) + 11)
    if head[:len(MAGIC)] != MAGIC:
        raise IndexCorruption("not an index container")
    _, tag, fp = struct.unpack_from("<HBQ", head, len(MAGIC))
    return METHODS.get(tag, "?"), fp
