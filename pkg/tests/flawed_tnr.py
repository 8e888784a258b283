"""Test-only reimplementation of the per-side access-node shortcut.

For each side of the inner block, S_in holds the outside endpoints of edges
crossing that side of the inner block and S_up the outside endpoints of edges
crossing the same side of the outer block. For every v in the cell and every
k in S_up, the j in S_in minimising dist(v, j) + dist(j, k) is marked. Paths
that leave through one side of the inner block and cross the outer block on
another side are never looked at, so some access nodes go missing.
"""
from __future__ import annotations

from roadbench.baseline import grow_tree
from roadbench.graph import INF, RoadNetwork
from roadbench.tnr import INNER, OUTER, AccessNodeSet, Grid


def _sides(x0, y0, bx, by, r):
    out = []
    if by > y0 + r:
        out.append("up")
    if by < y0 - r:
        out.append("down")
    if bx > x0 + r:
        out.append("right")
    if bx < x0 - r:
        out.append("left")
    return out


def _crossings(net: RoadNetwork, grid: Grid, cell: int, r: int) -> dict[str, set[int]]:
    g = grid.g
    x0, y0 = cell % g, cell // g
    cx, cy = grid.cx.tolist(), grid.cy.tolist()
    inside = [max(abs(cx[v] - x0), abs(cy[v] - y0)) <= r for v in range(net.n)]
    out: dict[str, set[int]] = {s: set() for s in ("up", "down", "left", "right")}
    for a in range(net.n):
        if not inside[a]:
            continue
        for b in net.nbrs[a]:
            if not inside[b]:
                for side in _sides(x0, y0, cx[b], cy[b], r):
                    out[side].add(b)
    return out


def flawed_access_nodes(net: RoadNetwork, grid: Grid) -> dict[int, AccessNodeSet]:
    members = grid.members()
    out = {}
    for cell, vs in sorted(members.items()):
        s_in = _crossings(net, grid, cell, INNER)
        s_up = _crossings(net, grid, cell, OUTER)
        marked = set()
        for side in s_in:
            cand = sorted(s_in[side])
            if not cand:
                continue
            from_j = {j: grow_tree(net, j)[0] for j in cand}
            for v in vs:
                for k in sorted(s_up[side]):
                    best = min(cand, key=lambda j: (from_j[j].get(v, INF) + from_j[j].get(k, INF), j))
                    marked.add(best)
        nodes = tuple(sorted(marked))
        rows = {}
        for v in vs:
            d = grow_tree(net, v, targets=nodes)[0]
            rows[v] = tuple(d[a] for a in nodes)
        out[cell] = AccessNodeSet(cell, nodes, rows)
    return out
