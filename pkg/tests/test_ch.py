from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadbench import fixtures
from roadbench.baseline import bidi_query, sssp
from roadbench.ch import CHParams, build_ch, ch_distance, ch_path, compute_order, contract_all
from roadbench.graph import RoadNetwork, check_path
from conftest import v


def _undirected(sc):
    return {(min(a, b), max(a, b), w, m) for a, b, w, m in sc}


def test_fig1_identity_shortcuts(fig1):
    rank = compute_order(fig1, CHParams(order="identity"))
    assert rank.tolist() == list(range(8))
    idx = contract_all(fig1, rank)
    want = {(v(3), v(8), 2, v(1)), (v(7), v(6), 2, v(5)), (v(7), v(8), 4, v(6))}
    assert _undirected(idx.shortcuts()) == _undirected(want)
    # v2's contraction adds nothing: no shortcut carries it as middle
    assert all(m != v(2) for *_, m in idx.shortcuts())
    assert ch_distance(idx, v(3), v(7)) == 6
    assert ch_distance(idx, v(1), v(7)) == 5
    assert ch_distance(idx, v(4), v(4)) == 0
    p = ch_path(idx, v(3), v(7))
    assert p.vertices == tuple(map(v, (3, 1, 8, 6, 5, 7)))
    assert idx.unpack_arc(v(7), v(8)) == [v(7), v(5), v(6), v(8)]


def test_order_is_permutation():
    for net in (fixtures.path_graph(3), fixtures.fig1(), fixtures.random_connected_graph(100, 4)):
        rank = compute_order(net)
        assert sorted(rank.tolist()) == list(range(net.n))


def test_star_center_last():
    net = fixtures.star_graph(5)
    assert compute_order(net)[0] == 5


def test_triangle_and_path():
    tri = RoadNetwork.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)], None)
    assert build_ch(tri, CHParams(order=[2, 0, 1])).num_shortcuts == 0
    p = fixtures.path_graph(3)
    idx = build_ch(p, CHParams(order=[1, 0, 2]))
    assert _undirected(idx.shortcuts()) == {(0, 2, 2, 1)}


def test_shortcut_weights_are_exact(small_graphs):
    for net, D in small_graphs:
        idx = build_ch(net)
        for a, b, w, m in idx.arcs.tolist():
            if m == -1:
                assert w == net.weight(a, b) >= D[a, b]
                continue
            assert w == D[a, b]
            seq = idx.unpack_arc(a, b)
            assert sum(net.weight(x, y) for x, y in zip(seq, seq[1:])) == w


def test_exhaustive_equivalence(small_graphs):
    for net, D in small_graphs:
        idx = build_ch(net)
        for s in range(net.n):
            for t in range(net.n):
                assert idx.distance(s, t) == D[s, t]
                p = idx.path(s, t)
                check_path(net, p, s, t)
                assert p.length == D[s, t]


def test_random_order_still_correct(small_graphs):
    net, D = small_graphs[1]
    perm = np.random.default_rng(9).permutation(net.n)
    idx = contract_all(net, perm)
    for s in range(0, net.n, 3):
        for t in range(net.n):
            assert idx.distance(s, t) == D[s, t]


def test_capped_witness_keeps_queries_correct(small_graphs):
    net, D = small_graphs[2]
    idx = build_ch(net, CHParams(witness_settle_limit=3))
    for a, b, w, m in idx.arcs.tolist():
        assert w >= D[a, b]
    for s in range(0, net.n, 4):
        for t in range(net.n):
            assert idx.distance(s, t) == D[s, t]


def test_path_without_shortcuts_matches_baseline():
    net = fixtures.path_graph(6)
    idx = build_ch(net, CHParams(order="identity"))
    assert idx.path(0, 5).vertices == bidi_query(net, 0, 5)[1].vertices


def test_search_space_smaller_than_bidi():
    net = fixtures.random_connected_graph(400, 11)
    idx = build_ch(net)
    rng = np.random.default_rng(1)
    ch_total = bd_total = 0
    for _ in range(50):
        s, t = rng.integers(0, net.n, 2).tolist()
        a, b = {}, {}
        idx.distance(s, t, a)
        bidi_query(net, s, t, b)
        ch_total += a["settled"]
        bd_total += b["settled"]
    assert ch_total < bd_total


def test_random_pairs_path_length():
    net = fixtures.random_connected_graph(100, 21)
    idx = build_ch(net)
    rng = np.random.default_rng(2)
    for _ in range(1000):
        s, t = rng.integers(0, net.n, 2).tolist()
        p = idx.path(s, t)
        check_path(net, p, s, t)
        assert p.length == idx.distance(s, t)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 35))
def test_ch_property(seed, n):
    net = fixtures.random_connected_graph(n, seed, max_weight=4)
    idx = build_ch(net)
    for s in range(n):
        d = sssp(net, s).dist
        for t in range(n):
            assert idx.distance(s, t) == d[t]
