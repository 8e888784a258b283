"""``roadbench`` command line.

Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 data error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import bench, container
from .graph import DimacsError, IndexCorruption, load_dimacs, write_dimacs
from .tnr import GridError
from .workload import (gen_linf_sets, gen_network_sets, measure_delta, random_pairs, read_querysets,
                       QuerySet, write_queryset)

log = logging.getLogger("roadbench")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DATA = 0, 1, 2, 3
DEFAULT_BUDGET = 24 * 2 ** 30


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_net(args):
    return load_dimacs(args.graph, args.coords)


def _dataset(args) -> str:
    return args.dataset or os.path.basename(args.graph).split(".")[0]


def cmd_build(args) -> int:
    net = _load_net(args)
    idx, secs = bench.build_index(args.method, net, grid=args.grid, fallback=args.fallback,
                                  bits=args.bits, workers=args.workers)
    size = container.store(idx, net, args.out)
    row = {"dataset": _dataset(args), "method": args.method,
           "build_seconds": f"{secs:.3f}", "index_bytes": size}
    if args.stats:
        bench.append_rows(args.stats, [row], "build")
    print(f"{args.method}: {size} bytes in {secs:.2f}s -> {args.out}")
    return EXIT_OK


def _engine(args, net):
    if args.index:
        if args.method and args.method != "baseline":
            raise UsageError("--method is only for the index-free baseline")
        if os.path.getsize(args.index) > args.ram_budget and not args.ignore_budget:
            raise IndexCorruption(f"{args.index} exceeds the RAM budget of {args.ram_budget} bytes "
                                  "(use --ignore-budget to override)")
        method, idx = container.load(args.index, net)
        return bench.Engine(method, net, idx)
    if args.method == "baseline":
        return bench.Engine("baseline", net)
    raise UsageError("give --index, or --method baseline")


def cmd_query(args) -> int:
    net = _load_net(args)
    engine = _engine(args, net)
    with open(args.queries) as fh:
        sets = read_querysets(fh, net)
    rows = []
    for qs in sets:
        mean = bench.time_queries(engine, qs.pairs, args.mode, check_paths=args.check_paths)
        rows.append({"dataset": _dataset(args), "method": engine.method, "queryset": qs.label,
                     "mode": args.mode, "mean_latency_us": "" if mean is None else f"{mean:.3f}",
                     "count": len(qs.pairs)})
    if args.csv:
        bench.append_rows(args.csv, rows, "query")
    else:
        bench.write_query_rows(sys.stdout, rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    net = _load_net(args)
    engines = []
    for path in args.index:
        method, idx = container.load(path, net)
        engines.append(bench.Engine(method, net, idx))
    if args.baseline:
        engines.append(bench.Engine("baseline", net))
    if not engines:
        raise UsageError("nothing to verify: give --index and/or --baseline")
    if args.all_pairs:
        pairs = [(s, t) for s in range(net.n) for t in range(net.n)]
    else:
        pairs = random_pairs(net, args.pairs, args.seed)
    bad = bench.verify(net, engines, pairs)
    ids = net.original_ids
    for m in bad[:50]:
        print(f"FAIL {m.method} ({ids[m.s]}, {ids[m.t]}): got {m.got}, want {m.want}")
    if bad:
        print(f"verify: {len(bad)} mismatches over {len(pairs)} pairs")
        return EXIT_VERIFY
    print(f"verify: PASS ({', '.join(e.method for e in engines)}; {len(pairs)} pairs)")
    return EXIT_OK


def cmd_gen_queries(args) -> int:
    net = _load_net(args)
    if args.kind == "linf":
        sets = gen_linf_sets(net, args.count, args.seed)
    elif args.kind == "network":
        sets = gen_network_sets(net, args.count, args.seed)
    else:
        sets = [QuerySet("random", random_pairs(net, args.count, args.seed), 0.0, 0.0, args.seed)]
    with open(args.out, "w") as fh:
        for qs in sets:
            write_queryset(qs, fh, net)
    for qs in sets:
        note = "" if qs.complete else " (partial)"
        print(f"{qs.label}: {len(qs.pairs)} pairs{note}")
    return EXIT_OK


def cmd_redundancy(args) -> int:
    net = _load_net(args)
    if args.queries:
        with open(args.queries) as fh:
            pairs = [p for qs in read_querysets(fh, net) for p in qs.pairs]
    else:
        pairs = random_pairs(net, args.pairs, args.seed)
    rep = measure_delta(net, pairs)
    if args.out:
        with open(args.out, "w") as fh:
            rep.write_csv(fh, net)
    print(f"min ratio: {rep.min_ratio}; pairs without a core-disjoint path: {rep.no_alternative}")
    return EXIT_OK


def cmd_report(args) -> int:
    tables = bench.merge_reports(args.csv)
    if args.out:
        with open(args.out, "w") as fh:
            bench.write_tables(tables, fh)
    else:
        bench.write_tables(tables, sys.stdout)
    return EXIT_OK


def cmd_synth(args) -> int:
    from .fixtures import spatial_window, synthetic_road_network
    net = synthetic_road_network(n=args.n, seed=args.seed)
    if args.window:
        net = spatial_window(net, args.window)
    with open(args.out_gr, "w") as gr, open(args.out_co, "w") as co:
        write_dimacs(net, gr, co)
    print(f"{net.n} vertices, {net.num_edges} edges")
    return EXIT_OK


def _graph_args(p):
    p.add_argument("--graph", required=True, help="DIMACS .gr file")
    p.add_argument("--coords", required=True, help="DIMACS .co file")
    p.add_argument("--dataset", help="dataset label for CSV rows (default: graph file stem)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="roadbench", description="Shortest path and distance index benchmark.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="build an index container")
    _graph_args(p)
    p.add_argument("--method", required=True, choices=["ch", "tnr", "silc", "pcpd"])
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=128, help="TNR cells per side")
    p.add_argument("--fallback", choices=["ch", "bidijkstra"], default="ch", help="TNR local-query method")
    p.add_argument("--bits", type=int, default=16, help="quadtree depth for SILC/PCPD")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stats", help="append a build row to this CSV")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="time query sets against an index")
    _graph_args(p)
    p.add_argument("--index")
    p.add_argument("--method", choices=["baseline"], help="run without an index")
    p.add_argument("--queries", required=True)
    p.add_argument("--mode", choices=["distance", "path"], default="distance")
    p.add_argument("--csv", help="append rows here instead of printing")
    p.add_argument("--check-paths", action="store_true", help="validate every returned path")
    p.add_argument("--ram-budget", type=int, default=DEFAULT_BUDGET, help="largest index in bytes")
    p.add_argument("--ignore-budget", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", help="compare indexes with plain Dijkstra")
    _graph_args(p)
    p.add_argument("--index", nargs="*", default=[])
    p.add_argument("--baseline", action="store_true", help="also check bidirectional Dijkstra")
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--all-pairs", action="store_true")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-queries", help="write seeded query sets")
    _graph_args(p)
    p.add_argument("--kind", choices=["linf", "network", "random"], default="linf")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_queries)

    p = sub.add_parser("redundancy", help="measure core-disjoint path ratios")
    _graph_args(p)
    p.add_argument("--pairs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--queries", help="use pairs from this query file instead")
    p.add_argument("--out", help="per-pair CSV")
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("report", help="merge build and query CSVs")
    p.add_argument("--csv", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write the synthetic road network as DIMACS files")
    p.add_argument("--n", type=int, default=48812)
    p.add_argument("--seed", type=int, default=2010)
    p.add_argument("--window", type=int, default=0, help="cut a connected window of this many vertices")
    p.add_argument("--out-gr", required=True)
    p.add_argument("--out-co", required=True)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"roadbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimacsError, IndexCorruption, GridError, bench.ReportError, OSError) as exc:
        print(f"roadbench: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
