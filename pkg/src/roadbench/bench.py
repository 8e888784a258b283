"""Benchmark plumbing: building indexes, timing queries, cross-checking, CSV rows."""
from __future__ import annotations

import csv
import logging
import os
import time
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .baseline import bidi_query, sssp
from .ch import build_ch
from .graph import Path, RoadNetwork, check_path
from .pcpd import build_pcp_set
from .silc import build_silc
from .tnr import build_grid, build_tnr

log = logging.getLogger(__name__)

METHODS = ("baseline", "ch", "tnr", "silc", "pcpd")
WARMUP = 10
QUERY_FIELDS = ["dataset", "method", "queryset", "mode", "mean_latency_us", "count"]
BUILD_FIELDS = ["dataset", "method", "build_seconds", "index_bytes"]
TIMING_NOTE = (f"# timing: time.perf_counter per query, mean over every query in the set; "
               f"{WARMUP} warm-up queries per set before measuring; index load excluded")
SILC_SIZE_WARNING = 1_000_000


class ReportError(ValueError):
    pass


@dataclass
class Engine:
    """Uniform distance/path interface over one method."""
    method: str
    net: RoadNetwork
    index: object = None

    def distance(self, s: int, t: int) -> int:
        if self.method == "baseline":
            return bidi_query(self.net, s, t)[0]
        if self.method in ("ch", "tnr"):
            return self.index.distance(s, t)
        if self.method == "silc":
            # the distance is the length of the hop walk; skip the wrapper frame
            return self.index.path(self.net, s, t).length
        return self.index.distance(self.net, s, t)

    def path(self, s: int, t: int) -> Path:
        if self.method == "baseline":
            return bidi_query(self.net, s, t)[1]
        if self.method in ("ch", "tnr"):
            return self.index.path(s, t)
        return self.index.path(self.net, s, t)


def build_index(method: str, net: RoadNetwork, grid: int = 128, fallback: str = "ch",
                bits: int = 16, workers: int = 1):
    """Return ``(index, seconds)``; the time covers preprocessing only."""
    t0 = time.perf_counter()
    if method == "ch":
        idx = build_ch(net)
    elif method == "tnr":
        idx = build_tnr(net, build_grid(net, grid), fallback_kind=fallback, workers=workers)
    elif method == "silc":
        if net.n > SILC_SIZE_WARNING:
            log.warning("SILC on %d vertices: expect a very large index", net.n)
        idx = build_silc(net, bits=bits, workers=workers)
    elif method == "pcpd":
        if net.n > SILC_SIZE_WARNING:
            log.warning("PCPD on %d vertices: expect a very large index", net.n)
        idx = build_pcp_set(net, bits=bits)
    else:
        raise ValueError(f"unknown method {method!r}")
    return idx, time.perf_counter() - t0


def time_queries(engine: Engine, pairs: Sequence[tuple[int, int]], mode: str,
                 warmup: int = WARMUP, check_paths: bool = False) -> float | None:
    """Mean latency in microseconds, or None for an empty set."""
    if not pairs:
        return None
    run = engine.distance if mode == "distance" else engine.path
    for i in range(warmup):
        run(*pairs[i % len(pairs)])
    clock = time.perf_counter
    total = 0.0
    for s, t in pairs:
        t0 = clock()
        out = run(s, t)
        total += clock() - t0
        if check_paths and mode == "path":
            check_path(engine.net, out, s, t)
    return total / len(pairs) * 1e6


@dataclass(frozen=True)
class Mismatch:
    method: str
    s: int
    t: int
    got: object
    want: int

    def __str__(self) -> str:
        return f"{self.method} ({self.s}, {self.t}): got {self.got}, want {self.want}"


def verify(net: RoadNetwork, engines: Iterable[Engine], pairs: Sequence[tuple[int, int]]) -> list[Mismatch]:
    """Compare every engine with plain Dijkstra on ``pairs``; paths must be valid and consistent."""
    engines = list(engines)
    by_source: dict[int, list[int]] = {}
    for s, t in pairs:
        by_source.setdefault(s, []).append(t)
    want = {}
    for s, ts in by_source.items():
        dist = sssp(net, s).dist
        for t in ts:
            want[s, t] = dist[t]
    bad = []
    for e in engines:
        for s, t in pairs:
            d = e.distance(s, t)
            if d != want[s, t]:
                bad.append(Mismatch(e.method, s, t, d, want[s, t]))
                continue
            p = e.path(s, t)
            try:
                check_path(net, p, s, t)
            except Exception as exc:  # any malformed path is a failure, whatever the cause
                bad.append(Mismatch(e.method, s, t, f"bad path: {exc}", want[s, t]))
                continue
            if p.length != d:
                bad.append(Mismatch(e.method, s, t, f"path length {p.length}", want[s, t]))
    return bad


# -- CSV ----------------------------------------------------------------------------

def write_query_rows(out: TextIO, rows: Iterable[dict], header: bool = True) -> None:
    if header:
        out.write(TIMING_NOTE + "\n")
    w = csv.DictWriter(out, QUERY_FIELDS, lineterminator="\n")
    if header:
        w.writeheader()
    for r in rows:
        w.writerow(r)


def write_build_rows(out: TextIO, rows: Iterable[dict], header: bool = True) -> None:
    w = csv.DictWriter(out, BUILD_FIELDS, lineterminator="\n")
    if header:
        w.writeheader()
    for r in rows:
        w.writerow(r)


def append_rows(path, rows: list[dict], kind: str) -> None:
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        (write_query_rows if kind == "query" else write_build_rows)(fh, rows, header=fresh)


def read_rows(path) -> tuple[str, list[dict]]:
    """Return ``(kind, rows)`` where kind is "query" or "build"."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ReportError(f"{path}: empty CSV")
    reader = csv.DictReader(lines)
    fields = reader.fieldnames or []
    if fields == QUERY_FIELDS:
        kind = "query"
    elif fields == BUILD_FIELDS:
        kind = "build"
    else:
        raise ReportError(f"{path}: unexpected columns {fields}")
    return kind, list(reader)


def merge_reports(paths: Sequence) -> dict[str, list[list[str]]]:
    """Merged tables: space and build time per method, latency per query set and mode.

    A method missing for some dataset or set is left blank.
    """
    builds: list[dict] = []
    queries: list[dict] = []
    for p in paths:
        kind, rows = read_rows(p)
        (builds if kind == "build" else queries).extend(rows)
    methods = [m for m in METHODS if any(r["method"] == m for r in builds + queries)]
    methods += sorted({r["method"] for r in builds + queries} - set(methods))

    def pivot(rows, keys, value):
        cells: dict[tuple, dict[str, str]] = {}
        for r in rows:
            cells.setdefault(tuple(r[k] for k in keys), {})[r["method"]] = r[value]
        table = [list(keys) + methods]
        for key in sorted(cells, key=_natural):
            table.append(list(key) + [cells[key].get(m, "") for m in methods])
        return table

    return {
        "space": pivot(builds, ["dataset"], "index_bytes"),
        "build_time": pivot(builds, ["dataset"], "build_seconds"),
        "latency": pivot(queries, ["dataset", "mode", "queryset"], "mean_latency_us"),
    }


def _natural(key: tuple) -> tuple:
    out = []
    for part in key:
        head = part.rstrip("0123456789")
        tail = part[len(head):]
        out.append((head, int(tail) if tail else -1))
    return tuple(out)


def write_tables(tables: dict[str, list[list[str]]], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    for name, table in tables.items():
        out.write(f"# {name}\n")
        w.writerows(table)


def over_budget(path, budget_bytes: int) -> bool:
    return os.path.getsize(path) > budget_bytes
