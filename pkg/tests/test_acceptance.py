"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that is printed in the pytest terminal
summary. Heavy inputs (the DE network, its 5,000-vertex window and the
indexes built on them) are shared through module-scoped fixtures.
"""
from __future__ import annotations

import gc
import io
import time

import numpy as np
import pytest
from scipy.sparse.csgraph import dijkstra

from roadbench import container, fixtures
from roadbench.baseline import all_pairs_distances
from roadbench.bench import Engine
from roadbench.ch import CHParams, build_ch, ch_distance, compute_order, contract_all
from roadbench.graph import check_path
from roadbench.pcpd import build_pcp_set
from roadbench.silc import build_silc, first_hop_partition
from roadbench.tnr import OUTER, build_grid, build_tnr, build_tnr_from_access
from roadbench.workload import gen_linf_sets, measure_delta, random_pairs, write_queryset
from conftest import record, v
from flawed_tnr import flawed_access_nodes

SEEDED_SIZES = [50] * 7 + [200] * 7 + [500] * 6
DE_PAIRS = 10_000
WINDOW = 5_000
TNR_GRID = 128
SPACE_WINDOW_LIMIT_S = 15 * 60


# -- shared inputs ------------------------------------------------------------------

@pytest.fixture(scope="module")
def seeded():
    """The 20 seeded random graphs with oracle matrices and all four indexes."""
    out = []
    for i, n in enumerate(SEEDED_SIZES):
        net = fixtures.random_connected_graph(n, 1000 + i)
        grid = build_grid(net, 16)
        idx = {
            "ch": build_ch(net),
            "tnr": build_tnr(net, grid),
            "silc": build_silc(net),
            "pcpd": build_pcp_set(net),
        }
        out.append((net, all_pairs_distances(net), grid, idx))
    return out


@pytest.fixture(scope="module")
def de():
    net, label = fixtures.de_network()
    return net, label


@pytest.fixture(scope="module")
def de_indexes(de):
    net, _ = de
    t0 = time.perf_counter()
    ch = build_ch(net)
    t1 = time.perf_counter()
    tnr = build_tnr(net, build_grid(net, TNR_GRID), fallback=ch)
    t2 = time.perf_counter()
    return {"ch": ch, "tnr": tnr}, {"ch": t1 - t0, "tnr": t2 - t1}


@pytest.fixture(scope="module")
def window(de):
    net, _ = de
    return fixtures.spatial_window(net, WINDOW)


@pytest.fixture(scope="module")
def window_indexes(de, window):
    """All four indexes on the window; TNR keeps the full network's 128x128 cell geometry."""
    times = {}
    out = {}
    t = time.perf_counter()
    out["ch"] = build_ch(window)
    times["ch"] = time.perf_counter() - t
    t = time.perf_counter()
    grid = build_grid(window, TNR_GRID, bbox=de[0].bbox)
    out["tnr"] = build_tnr(window, grid, fallback=out["ch"])
    times["tnr"] = time.perf_counter() - t + times["ch"]
    t = time.perf_counter()
    out["silc"] = build_silc(window)
    times["silc"] = time.perf_counter() - t
    t = time.perf_counter()
    out["pcpd"] = build_pcp_set(window)
    times["pcpd"] = time.perf_counter() - t
    return out, times


def _oracle_pairs(net, pairs, batch=64):
    by_src: dict[int, list[int]] = {}
    for s, t in pairs:
        by_src.setdefault(s, []).append(t)
    srcs = sorted(by_src)
    want = {}
    for lo in range(0, len(srcs), batch):
        chunk = srcs[lo:lo + batch]
        d = dijkstra(net.csr(), directed=True, indices=chunk)
        for row, s in zip(d, chunk):
            for t in by_src[s]:
                want[s, t] = int(row[t])
    return want


def _engine(method, net, idx):
    return Engine(method, net, idx)


def _check_pairs(net, engines, pairs, want):
    """Count distance and path failures per method."""
    bad = {}
    for name, e in engines.items():
        errs = 0
        for s, t in pairs:
            d = e.distance(s, t)
            p = e.path(s, t)
            try:
                check_path(net, p, s, t)
                ok = d == want[s, t] and p.length == d
            except Exception:
                ok = False
            errs += not ok
        bad[name] = errs
    return bad


# -- criteria -------------------------------------------------------------------------

def test_c1_oracle_equivalence(seeded, de, de_indexes, window, window_indexes):
    failures = {}
    checked = 0
    for net, oracle, _, idx in seeded:
        engines = {m: _engine(m, net, i) for m, i in idx.items()}
        pairs = [(s, t) for s in range(net.n) for t in range(net.n)]
        want = {(s, t): int(oracle[s, t]) for s, t in pairs}
        for m, k in _check_pairs(net, engines, pairs, want).items():
            failures[m] = failures.get(m, 0) + k
        checked += len(pairs)
    dnet, _ = de
    dpairs = random_pairs(dnet, DE_PAIRS, 2010)
    dwant = _oracle_pairs(dnet, dpairs)
    idx, _ = de_indexes
    for m, k in _check_pairs(dnet, {m: _engine(m, dnet, i) for m, i in idx.items()}, dpairs, dwant).items():
        failures[m] = failures.get(m, 0) + k
    wpairs = random_pairs(window, DE_PAIRS, 2011)
    wwant = _oracle_pairs(window, wpairs)
    widx, _ = window_indexes
    engines = {m: _engine(m, window, widx[m]) for m in ("silc", "pcpd")}
    for m, k in _check_pairs(window, engines, wpairs, wwant).items():
        failures[m] = failures.get(m, 0) + k
    ok = not any(failures.values())
    record(1, ok, f"{checked} exhaustive pairs on 20 graphs, {DE_PAIRS} DE pairs (ch, tnr), "
                  f"{DE_PAIRS} window pairs (silc, pcpd); mismatches {failures}")
    assert ok, failures


def test_c2_figure1(fig1):
    rank = compute_order(fig1, CHParams(order="identity"))
    idx = contract_all(fig1, rank)
    got = {(min(a, b), max(a, b), w, m) for a, b, w, m in idx.shortcuts()}
    want = {(v(3), v(8), 2, v(1)), (v(6), v(7), 2, v(5)), (v(7), v(8), 4, v(6))}
    want = {(min(a, b), max(a, b), w, m) for a, b, w, m in want}
    no_v2 = all(m != v(2) for *_, m in idx.shortcuts())
    dist = ch_distance(idx, v(3), v(7))
    part = first_hop_partition(fig1, v(8))
    classes = {}
    for t, h in part.items():
        classes.setdefault(h, set()).add(t)
    want_part = {v(6): {v(4), v(5), v(6), v(7)}, v(1): {v(1), v(3)}, v(2): {v(2)}}
    ok = got == want and no_v2 and dist == 6 and classes == want_part
    record(2, ok, f"shortcuts {'exact' if got == want else sorted(got)}, ch_distance(v3,v7)={dist}, "
                  f"SILC partition from v8 {'exact' if classes == want_part else classes}")
    assert ok


def test_c3_appendix_b():
    net = fixtures.appendix_b()
    grid = build_grid(net, 16, fixtures.APPB_BBOX)
    c0 = grid.cell_of(v(1))
    good = build_tnr(net, grid)
    bad_access = flawed_access_nodes(net, grid)
    bad = build_tnr_from_access(net, grid, bad_access)
    truth = int(all_pairs_distances(net)[v(1), v(6)])
    g_d, b_d = good.distance(v(1), v(6)), bad.distance(v(1), v(6))
    ok = (v(5) in good.access[c0].nodes and g_d == truth
          and v(5) not in bad_access[c0].nodes and b_d > truth)
    record(3, ok, f"corrected A(C0) has v5={v(5) in good.access[c0].nodes}, dist(v1,v6)={g_d} (true {truth}); "
                  f"flawed A(C0) has v5={v(5) in bad_access[c0].nodes}, dist={b_d}")
    assert ok


def test_c4_tnr_coverage(seeded):
    violations = 0
    checked = 0
    for net, oracle, grid, idx in seeded:
        cell = grid.cell.tolist()
        tnr = idx["tnr"]
        for c, acc in tnr.access.items():
            far = np.array([t for t in range(net.n) if grid.gap(c, cell[t]) > OUTER], dtype=np.int64)
            if not len(far):
                continue
            a = np.array(acc.nodes, dtype=np.int64)
            for s in acc.dist:
                checked += len(far)
                if not len(a):
                    violations += len(far)
                    continue
                best = (oracle[s, a][:, None] + oracle[np.ix_(a, far)]).min(axis=0)
                violations += int((best != oracle[s, far]).sum())
    ok = violations == 0 and checked > 0
    record(4, ok, f"{checked} (in-cell, beyond-outer-shell) pairs on 20 graphs, {violations} uncovered")
    assert ok


def test_c5_space_ordering(window, window_indexes):
    idx, times = window_indexes
    size = {m: len(container.dumps(i, window)) for m, i in idx.items()}
    total = sum(times.values())
    ratio = size["pcpd"] / size["silc"]
    order_ok = size["ch"] < size["tnr"] < size["silc"]
    ok = order_ok and 0.25 <= ratio <= 4 and total < SPACE_WINDOW_LIMIT_S
    record(5, ok, f"{window.n}-vertex window bytes ch={size['ch']} tnr={size['tnr']} silc={size['silc']} "
                  f"pcpd={size['pcpd']} (pcpd/silc={ratio:.2f}); builds {total:.0f}s")
    assert ok, size


def _round_means(runs, pairs, rounds=5, warmup=10):
    """Mean over pairs of the best per-query latency (us) for each (engine, mode) entry.

    Every pair is timed ``rounds`` times per entry. The entry order is reversed
    on alternate rounds so each entry sees the other's cache footprint equally
    often, and garbage collection is paused while timing.
    """
    names = list(runs)
    calls = [getattr(e, mode) for e, mode in runs.values()]
    for i in range(warmup):
        for f in calls:
            f(*pairs[i % len(pairs)])
    clock = time.perf_counter
    tot = [0.0] * len(calls)
    fwd = list(range(len(calls)))
    gc.disable()
    try:
        for s, t in pairs:
            best = [float("inf")] * len(calls)
            for r in range(rounds):
                for x in (fwd if r % 2 == 0 else fwd[::-1]):
                    t0 = clock()
                    calls[x](s, t)
                    best[x] = min(best[x], clock() - t0)
            for x in fwd:
                tot[x] += best[x]
    finally:
        gc.enable()
    return {name: tot[x] / len(pairs) * 1e6 for x, name in enumerate(names)}


def test_c6_query_trends(window, window_indexes):
    idx, _ = window_indexes
    net = window
    sets = gen_linf_sets(net, 100, seed=6)
    full = [q for q in sets if q.complete]
    far2 = full[-2:]
    eng = {m: _engine(m, net, idx[m]) for m in ("ch", "tnr", "silc")}
    eng["baseline"] = Engine("baseline", net)
    notes = []
    a_far = a_near = b_ch = b_silc = True
    for qs in far2:
        t = _round_means({"ch": (eng["ch"], "distance"), "tnr": (eng["tnr"], "distance")}, qs.pairs)
        a_far &= t["tnr"] <= t["ch"]
        notes.append(f"{qs.label} tnr/ch={t['tnr'] / t['ch']:.2f}")
    for qs in sets[:3]:
        if not qs.pairs:
            continue
        t = _round_means({"ch": (eng["ch"], "distance"), "tnr": (eng["tnr"], "distance")}, qs.pairs, rounds=15)
        a_near &= abs(t["tnr"] - t["ch"]) <= 0.10 * t["ch"]
        notes.append(f"{qs.label} tnr/ch={t['tnr'] / t['ch']:.3f}")
    for qs in full:
        t = _round_means({"chd": (eng["ch"], "distance"), "chp": (eng["ch"], "path"),
                          "sd": (eng["silc"], "distance"), "sp": (eng["silc"], "path")}, qs.pairs)
        b_ch &= t["chp"] > t["chd"]
        close = abs(t["sp"] - t["sd"]) <= 0.05 * t["sd"]
        b_silc &= close
        notes.append(f"{qs.label} silc path/dist={t['sp'] / t['sd']:.3f}")
    top = full[-1]
    t = _round_means({m: (e, "distance") for m, e in eng.items()}, top.pairs, rounds=1)
    slowest_other = max(t[m] for m in ("ch", "tnr", "silc"))
    c_ok = t["baseline"] >= 10 * slowest_other
    notes.append(f"{top.label} baseline/slowest={t['baseline'] / slowest_other:.1f}")
    ok = a_far and a_near and b_ch and b_silc and c_ok
    record(6, ok, f"(a) far {a_far} near {a_near}; (b) ch {b_ch} silc {b_silc}; (c) {c_ok}; " + ", ".join(notes))
    assert ok, notes


def test_c7_redundancy(seeded, de):
    small_ok = True
    for net, _, _, _ in seeded[::4]:
        rep = measure_delta(net, random_pairs(net, 200, 7))
        small_ok &= all(r >= 1 for r in rep.ratios)
    net, label = de
    rep = measure_delta(net, random_pairs(net, DE_PAIRS, 2012))
    hard = small_ok and all(r >= 1 for r in rep.ratios)
    low = rep.min_ratio is not None and rep.min_ratio <= 1.01
    record(7, hard and low, f"all ratios >= 1: {hard}; {label} min ratio over {DE_PAIRS} pairs = "
                            f"{rep.min_ratio} (need <= 1.01); {rep.no_alternative} pairs without alternative")
    assert hard and low


def test_c8_determinism(seeded, window):
    net = seeded[-1][0]
    builders = {
        "ch": lambda w: build_ch(net),
        "tnr": lambda w: build_tnr(net, build_grid(net, 16), workers=w),
        "silc": lambda w: build_silc(net, workers=w),
        "pcpd": lambda w: build_pcp_set(net),
    }
    same = {}
    for m, b in builders.items():
        blobs = {container.dumps(b(w), net) for w in (1, 1, 2)}
        same[m] = len(blobs) == 1
    same["ch-window"] = len({container.dumps(build_ch(window), window) for _ in range(2)}) == 1

    def queries():
        buf = io.StringIO()
        for qs in gen_linf_sets(window, 50, seed=8):
            write_queryset(qs, buf, window)
        return buf.getvalue().encode()

    same["gen-queries"] = queries() == queries()
    ok = all(same.values())
    record(8, ok, f"byte-identical rebuilds (workers 1 and 2): {same}")
    assert ok


def test_c9_round_trip(window, window_indexes):
    idx, _ = window_indexes
    pairs = random_pairs(window, 1000, 2013)
    same = {}
    for m, i in idx.items():
        method, back = container.loads(container.dumps(i, window), window)
        a, b = _engine(m, window, i), _engine(method, window, back)
        same[m] = method == m and [a.distance(s, t) for s, t in pairs] == [b.distance(s, t) for s, t in pairs]
    ok = all(same.values())
    record(9, ok, f"store/load/query on 1000 pairs: {same}")
    assert ok
