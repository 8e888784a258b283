"""Why per-side access-node selection is not enough.

On the six-vertex fixture, v1 sits alone in its cell and v6 is reachable
only through v5, which lies above the inner block while v6 lies to the
right of the outer block. A selection that pairs each side of the inner
block only with the same side of the outer block never looks at that path,
drops v5 and overestimates dist(v1, v6). The access nodes built from full
shortest paths keep it.
"""
from __future__ import annotations

import sys
from pathlib import Path

from roadbench import fixtures
from roadbench.tnr import build_grid, build_tnr, build_tnr_from_access

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from flawed_tnr import flawed_access_nodes  # noqa: E402


def names(vs) -> str:
    return "{" + ", ".join(f"v{x + 1}" for x in vs) + "}"


def main() -> None:
    net = fixtures.appendix_b()
    grid = build_grid(net, 16, fixtures.APPB_BBOX)
    c0 = grid.cell_of(0)
    good = build_tnr(net, grid)
    flawed = flawed_access_nodes(net, grid)
    bad = build_tnr_from_access(net, grid, flawed)
    print(f"cell of v1: {grid.xy(c0)}; v1 -> v6 is {grid.gap(c0, grid.cell_of(5))} cells away")
    print(f"access nodes, full paths: {names(good.access[c0].nodes)}")
    print(f"access nodes, per side:   {names(flawed[c0].nodes)}")
    print(f"dist(v1, v6): full paths {good.distance(0, 5)}, per side {bad.distance(0, 5)}")


if __name__ == "__main__":
    main()
