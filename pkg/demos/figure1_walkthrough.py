"""Walk through the eight-vertex example network.

Contracts it in identity order, prints the shortcuts and an upward query,
then shows the first-hop partition SILC stores for v8 and the quadtree
intervals that encode it.
"""
from __future__ import annotations

from roadbench import fixtures
from roadbench.ch import CHParams, ch_distance, ch_path, compute_order, contract_all
from roadbench.silc import build_interval_map, first_hop_partition


def name(i: int) -> str:
    return f"v{i + 1}"


def main() -> None:
    net = fixtures.fig1()
    idx = contract_all(net, compute_order(net, CHParams(order="identity")))
    print("shortcuts (endpoint, endpoint, weight, middle):")
    for a, b, w, m in sorted(idx.shortcuts()):
        print(f"  {name(a)} - {name(b)}  w={w}  via {name(m)}")
    p = ch_path(idx, 2, 6)
    print(f"\nch_distance(v3, v7) = {ch_distance(idx, 2, 6)}")
    print("unpacked path:", " -> ".join(name(x) for x in p.vertices))

    part = first_hop_partition(net, 7)
    classes: dict[int, list[str]] = {}
    for t, hop in sorted(part.items()):
        classes.setdefault(hop, []).append(name(t))
    print("\nfirst-hop partition from v8:")
    for hop, members in sorted(classes.items()):
        print(f"  via {name(hop)}: {', '.join(members)}")
    imap = build_interval_map(part, net.coords, bits=3)
    print(f"\n{len(imap.lo)} Morton intervals at depth 3:")
    for lo, hi, c in zip(imap.lo.tolist(), imap.hi.tolist(), imap.color.tolist()):
        print(f"  [{lo:2d}, {hi:2d}] -> {name(c)}")


if __name__ == "__main__":
    main()
