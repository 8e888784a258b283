"""A small end-to-end benchmark on a synthetic road network.

Builds every index on a spatial window of the seeded synthetic network,
checks all of them against Dijkstra on random pairs, and prints index sizes
and mean query latencies for the L-infinity query sets.

    python demos/desk_benchmark.py --size 2000 --count 50
"""
from __future__ import annotations

import argparse

from roadbench import container, fixtures
from roadbench.bench import Engine, build_index, time_queries, verify
from roadbench.workload import gen_linf_sets, random_pairs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=2000, help="vertices in the window")
    ap.add_argument("--count", type=int, default=50, help="queries per set")
    ap.add_argument("--grid", type=int, default=64)
    args = ap.parse_args()

    net = fixtures.spatial_window(fixtures.synthetic_road_network(), args.size)
    print(f"window: {net.n} vertices, {net.num_edges} edges")
    engines = {"baseline": Engine("baseline", net)}
    for method in ("ch", "tnr", "silc", "pcpd"):
        idx, secs = build_index(method, net, grid=args.grid)
        size = len(container.dumps(idx, net))
        print(f"{method:5s} built in {secs:6.1f}s, {size / 1e6:7.2f} MB")
        engines[method] = Engine(method, net, idx)

    bad = verify(net, engines.values(), random_pairs(net, 300, 1))
    print("verify:", "PASS" if not bad else f"{len(bad)} mismatches, first {bad[0]}")

    sets = [q for q in gen_linf_sets(net, args.count, seed=1) if q.pairs]
    print("\nmean distance-query latency (us)")
    print("set   " + "".join(f"{m:>10s}" for m in engines))
    for qs in sets:
        row = [time_queries(e, qs.pairs, "distance") for e in engines.values()]
        print(f"{qs.label:5s} " + "".join(f"{x:10.1f}" for x in row))


if __name__ == "__main__":
    main()
