from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadbench import fixtures
from roadbench.baseline import (bidi_query, canonical_path, canonical_trees,
                                first_hops_from_parents, grow_tree, sssp)
from roadbench.graph import RoadNetwork, check_path
from conftest import v


def test_fig1_sssp(fig1):
    st8 = sssp(fig1, v(8))
    assert st8.dist[v(3)] == 2 and st8.dist[v(7)] == 4
    assert sssp(fig1, v(3)).dist[v(7)] == 6


def test_single_vertex():
    net = RoadNetwork.from_edges(1, [], [(0, 0)])
    st0 = sssp(net, 0)
    assert st0.dist == [0] and st0.parent == [-1]


def test_fig1_bidi(fig1):
    d, p = bidi_query(fig1, v(3), v(7))
    assert d == 6
    assert p.vertices == tuple(map(v, (3, 1, 8, 6, 5, 7)))
    assert bidi_query(fig1, v(1), v(7))[0] == 5
    d, p = bidi_query(fig1, 4, 4)
    assert d == 0 and p.vertices == (4,)


def test_stop_predicate(fig1):
    st1 = sssp(fig1, v(1), stop=lambda x, d: x == v(8))
    assert st1.settled[v(8)] and not all(st1.settled)


def test_bidi_matches_oracle_exhaustively(small_graphs):
    for net, D in small_graphs:
        for s in range(net.n):
            for t in range(net.n):
                d, p = bidi_query(net, s, t)
                assert d == D[s, t]
                check_path(net, p, s, t)


def test_bidi_settle_bound(small_graphs):
    net, D = small_graphs[0]
    wmax = int(net.edges[:, 2].max())
    for s, t in [(0, 5), (3, 17), (10, 29)]:
        stats = {}
        bidi_query(net, s, t, stats)
        # each side only settles keys below mu, so the union is bounded by a full search
        assert stats["settled"] <= 2 * net.n
        # forward settles never exceed the final distance plus the heaviest arc
        st = sssp(net, s, stop=lambda x, d: d > D[s, t] + wmax)
        assert st.settled[t]


def test_canonical_parent_is_min_tight_predecessor(small_graphs):
    for net, D in small_graphs:
        for s in range(0, net.n, 7):
            st = sssp(net, s)
            for x in range(net.n):
                if x == s:
                    assert st.parent[x] == -1
                    continue
                tight = [u for u, w in net.neighbors(x) if D[s, u] + w == D[s, x]]
                assert st.parent[x] == min(tight)


def test_canonical_trees_match_python(small_graphs):
    for net, D in small_graphs:
        src = list(range(net.n))
        dist, parent = canonical_trees(net, src, batch_arcs=500)
        assert np.array_equal(dist, D)
        for s in range(0, net.n, 5):
            assert parent[s].tolist() == sssp(net, s).parent


def test_first_hops(fig1):
    dist, parent = canonical_trees(fig1, [v(8)])
    hop = first_hops_from_parents(parent, [v(8)])[0]
    want = {1: 1, 3: 1, 2: 2, 4: 6, 5: 6, 6: 6, 7: 6}
    assert {i + 1: int(hop[i]) + 1 for i in range(8) if i != v(8)} == want
    assert hop[v(8)] == -1


def test_grow_tree_agrees_with_sssp(small_graphs):
    net, D = small_graphs[1]
    full = sssp(net, 3)
    dist, parent, order = grow_tree(net, 3, targets=[10, 40])
    assert 10 in dist and 40 in dist
    for x in order:
        assert dist[x] == full.dist[x] and parent[x] == full.parent[x]


def test_prefix_suffix_closed(small_graphs):
    net, _ = small_graphs[2]
    for s, t in [(0, 99), (5, 77), (13, 2)]:
        p = canonical_path(net, s, t).vertices
        for i in range(1, len(p) - 1):
            assert canonical_path(net, s, p[i]).vertices == p[: i + 1]
            assert canonical_path(net, p[i], t).vertices == p[i:]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 40))
def test_bidi_property(seed, n):
    net = fixtures.random_connected_graph(n, seed, max_weight=5)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        s, t = rng.integers(0, n, 2).tolist()
        d, p = bidi_query(net, s, t)
        assert d == sssp(net, s).dist[t]
        check_path(net, p, s, t)
        assert p.length == d
