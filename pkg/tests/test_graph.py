from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadbench import fixtures
from roadbench.graph import (ContractViolation, DimacsError, Path, RoadNetwork, check_path,
                             load_dimacs, path_concat, validate, write_dimacs)

GR = "c tiny\np sp 3 4\na 1 2 5\na 2 1 5\na 2 3 7\na 3 2 7\n"
CO = "p aux sp co 3\nv 1 0 0\nv 2 10 0\nv 3 20 5\n"


def test_load_symmetrizes():
    net = load_dimacs(io.StringIO(GR), io.StringIO(CO))
    assert net.n == 3 and net.num_edges == 2
    assert sorted(net.edges[:, 2].tolist()) == [5, 7]
    assert net.stats["raw_arcs"] == 4
    assert net.weight(0, 1) == net.weight(1, 0) == 5


def test_asymmetric_pair_keeps_min(caplog):
    gr = "p sp 2 2\na 1 2 5\na 2 1 6\n"
    with caplog.at_level("WARNING"):
        net = load_dimacs(io.StringIO(gr), io.StringIO("v 1 0 0\nv 2 1 1\n"))
    assert net.num_edges == 1 and net.weight(0, 1) == 5
    assert net.stats["asymmetric_pairs"] == 1
    assert "asymmetric" in caplog.text


def test_parse_errors_carry_line_numbers():
    with pytest.raises(DimacsError, match="line 3"):
        load_dimacs(io.StringIO("p sp 2 2\na 1 2 5\na 1 x 5\n"))
    with pytest.raises(DimacsError):
        load_dimacs(io.StringIO("p sp 2 1\na 1 9 5\n"))
    with pytest.raises(DimacsError):
        load_dimacs(io.StringIO("p sp 2 2\na 1 2 5\na 2 1 5\n"), io.StringIO("v 1 0 0\n"))


def test_restricts_to_largest_component():
    gr = "p sp 5 6\na 1 2 1\na 2 1 1\na 2 3 1\na 3 2 1\na 4 5 1\na 5 4 1\n"
    co = "".join(f"v {i} {i} 0\n" for i in range(1, 6))
    net = load_dimacs(io.StringIO(gr), io.StringIO(co))
    assert net.n == 3
    assert net.original_ids.tolist() == [1, 2, 3]


def test_round_trip_is_idempotent():
    net = fixtures.random_connected_graph(80, seed=5)
    gr, co = io.StringIO(), io.StringIO()
    write_dimacs(net, gr, co)
    again = load_dimacs(io.StringIO(gr.getvalue()), io.StringIO(co.getvalue()))
    assert np.array_equal(again.edges, net.edges)
    assert np.array_equal(again.coords, net.coords)
    assert again.fingerprint() == net.fingerprint()


def test_validate_fig1(fig1):
    rep = validate(fig1)
    assert rep.ok and rep.connected and rep.symmetric and rep.max_degree == 3


def test_validate_single_vertex_and_disconnected():
    one = RoadNetwork.from_edges(1, [], [(0, 0)])
    rep = validate(one)
    assert rep.connected and rep.max_degree == 0
    two = RoadNetwork.from_edges(4, [(0, 1, 1), (2, 3, 1)], [(0, 0)] * 4)
    rep = validate(two)
    assert not rep.connected and not rep.ok
    assert any("connected" in p for p in rep.problems)


def test_path_concat():
    a = Path((0, 1, 2), 3)
    b = Path((2, 5), 4)
    c = path_concat(a, b)
    assert c.vertices == (0, 1, 2, 5) and c.length == 7 and c.k == 3
    assert path_concat(Path.trivial(0), a) == a
    with pytest.raises(ContractViolation):
        path_concat(b, a)


def test_fig1_concat(fig1):
    a = Path.from_vertices(fig1, [2, 0, 7])
    b = Path.from_vertices(fig1, [7, 5, 4, 6])
    c = path_concat(a, b)
    assert c.length == 6
    check_path(fig1, c, 2, 6)


def test_check_path_rejects_non_edges(fig1):
    with pytest.raises(ContractViolation):
        check_path(fig1, Path((0, 6), 1))
    with pytest.raises(ContractViolation):
        check_path(fig1, Path((0, 2), 5))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(0, 50)), max_size=40))
def test_from_edges_normalizes(raw):
    net = RoadNetwork.from_edges(10, raw, None)
    best = {}
    for a, b, w in raw:
        if a != b:
            key = (min(a, b), max(a, b))
            best[key] = min(w, best.get(key, w))
    assert {(int(a), int(b)): int(w) for a, b, w in net.edges} == best
    for u in range(10):
        for x, w in net.neighbors(u):
            assert net.weight(x, u) == w
