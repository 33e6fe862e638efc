"""Command-line entry point: ``wsbfs {gen,bfs,verify,bench}``."""

from __future__ import annotations

import argparse
import logging
import os
import statistics
import sys

import numpy as np

from . import rng
from .graph import (
    UNREACHED,
    GraphFormatError,
    build_csr,
    generate_erdos_renyi,
    generate_rmat,
    load_edge_list,
    load_matrix_market,
    serial_bfs,
    write_edge_list,
)
from .instrumentation import (
    aggregate_json,
    compare_variants,
    evaluate_bound,
    ratio_table,
    traced_run,
    write_trace_csv,
)
from .s3bfs import VARIANTS, RunConfig

log = logging.getLogger("wsbfs")


def default_workers() -> int:
    n = os.cpu_count()
    if not n:
        log.warning("could not detect the core count; using 1 worker")
        return 1
    return n


def parse_sources(spec: str, n: int) -> list[int]:
    """``"7"`` or ``"random:<count>:<seed>"``."""
    if spec.startswith("random:"):
        try:
            _, count, seed = spec.split(":")
            count, seed = int(count), int(seed)
        except ValueError:
            raise ValueError(f"bad source spec {spec!r}; want random:<count>:<seed>") from None
        if n == 0:
            return []
        return rng.integers_below(n, seed, count).tolist()
    return [int(spec)]


def parse_int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("worker counts must be >= 1")
    return vals


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def load_graph(path: str, directed: bool, vertices: int | None = None):
    with open(path) as fh:
        if path.endswith(".mtx"):
            edges, n = load_matrix_market(fh)
        else:
            edges, n = load_edge_list(fh)
    if vertices is not None:
        if vertices < n:
            raise GraphFormatError(f"--vertices {vertices} is below the largest id + 1 ({n})")
        n = vertices
    return build_csr(edges, n, symmetrize=not directed)


def cmd_gen(args) -> int:
    if args.kind == "er":
        edges = generate_erdos_renyi(args.n, args.m, args.seed)
        n = args.n
        header = [f"erdos-renyi n={args.n} m={args.m} seed={args.seed}"]
    else:
        edges = generate_rmat(args.scale, args.ef, args.a, args.b, args.c, args.seed)
        n = 1 << args.scale
        header = [f"rmat scale={args.scale} ef={args.ef} a={args.a} b={args.b} c={args.c} "
                  f"seed={args.seed}"]
    write_edge_list(args.out, edges, header)
    print(f"n={n} m={len(edges)}")
    return 0


def _summary(dist: np.ndarray) -> tuple[int, int]:
    reached = dist != UNREACHED
    return int(reached.sum()), int(dist[reached].max())


def cmd_bfs(args) -> int:
    g = load_graph(args.graph, args.directed, args.vertices)
    sources = parse_sources(args.source, g.vertex_count)
    workers = args.workers or default_workers()
    traces = []
    run_id = 0
    lines = []
    for src in sources:
        for _ in range(args.reps):
            cfg = RunConfig(src, workers, args.variant, args.grainsize)
            result, trace = traced_run(g, cfg, run_id)
            traces.append(trace)
            run_id += 1
        reach, ecc = _summary(result.distances)
        lines.append(f"source={src} reachable={reach} max_level={ecc} "
                     f"levels={len(result.levels)} time_s={result.total_time:.6f}")
        if args.dump:
            path = args.dump if len(sources) == 1 else f"{args.dump}.{src}"
            d = result.distances
            with open(path, "w") as fh:
                for v in range(len(d)):
                    fh.write(f"{v} {'-1' if d[v] == UNREACHED else int(d[v])}\n")
    if args.trace_csv:
        with open(args.trace_csv, "w") as fh:
            write_trace_csv(traces, fh)
    if args.output == "csv":
        sys.stdout.write(write_trace_csv(traces))
    elif args.output == "json":
        bounds = [evaluate_bound(t.levels, workers, g.vertex_count, g.edge_count, t.total_time)
                  for t in traces]
        print(aggregate_json(traces, bounds=bounds))
    else:
        print("\n".join(lines))
        for lvl in traces[-1].levels if traces else []:
            steps = " ".join(f"{s.step_name}={s.work_items}/{s.workers_used}" for s in lvl.steps)
            print(f"  level {lvl.level}: n_l={lvl.n_l} e_l={lvl.e_l} {steps}")
    return 0


def cmd_verify(args) -> int:
    g = load_graph(args.graph, args.directed, args.vertices)
    if g.vertex_count == 0:
        print("no vertices: nothing to verify")
        return 0
    sources = rng.integers_below(g.vertex_count, args.seed, args.sources).tolist()
    variants = VARIANTS if args.variant == "both" else (args.variant,)
    failures = 0
    checked = 0
    for src in sources:
        oracle = serial_bfs(g, src)
        for p in args.workers:
            for variant in variants:
                result, _ = traced_run(g, RunConfig(src, p, variant, args.grainsize))
                got = result.distances
                if args.corrupt_vertex is not None:
                    got = got.copy()
                    got[args.corrupt_vertex] = got[args.corrupt_vertex] + 1
                checked += 1
                diff = np.flatnonzero(got != oracle)
                if len(diff):
                    v = int(diff[0])
                    failures += 1
                    print(f"FAIL source={src} P={p} variant={variant}: vertex {v} "
                          f"got {int(got[v])} expected {int(oracle[v])}")
    status = "PASS" if failures == 0 else "FAIL"
    print(f"{status}: {checked - failures}/{checked} runs match serial BFS")
    return 0 if failures == 0 else 1


def cmd_bench(args) -> int:
    g = load_graph(args.graph, args.directed, args.vertices)
    if g.vertex_count == 0:
        print("no vertices: nothing to benchmark")
        return 0
    workers = args.workers or default_workers()
    sources = rng.integers_below(g.vertex_count, args.seed, args.sources).tolist()
    sens, insens = [], []
    for _ in range(args.experiments):
        comp = compare_variants(g, sources, workers, args.reps, grainsize=args.grainsize)
        offset = len(sens) + len(insens)
        for tr in comp.traces:
            tr.run_id += offset
        sens += comp.sensitive
        insens += comp.insensitive
    table = ratio_table(sens, insens)
    bounds = [evaluate_bound(t.levels, workers, g.vertex_count, g.edge_count, t.total_time)
              for t in sens]

    sweep = {}
    for p in args.sweep or []:
        times = [traced_run(g, RunConfig(s, p, "sensitive", args.grainsize))[0].total_time
                 for s in sources for _ in range(args.reps)]
        sweep[p] = statistics.median(times)

    print(f"graph n={g.vertex_count} m={g.edge_count} P={workers} sources={len(sources)} "
          f"reps={args.reps} experiments={args.experiments}")
    print("level  work  wall_ratio  core_ratio   (insensitive / sensitive)")
    for row in table.levels:
        print(f"{row.level:5d} {row.mean_work:6.0f} {row.wall_ratio:11.3f} {row.core_ratio:11.3f}")
    print(f"total  wall_ratio={table.wall_ratio:.3f} core_ratio={table.core_ratio:.3f}")
    if sweep:
        base = sweep[args.sweep[0]]
        for p, t in sweep.items():
            print(f"P={p} median_time_s={t:.6f} speedup={base / t if t else float('nan'):.3f}")
    if bounds:
        mean_pred = statistics.fmean(b.predicted_units for b in bounds)
        print(f"bound predicted_units(mean)={mean_pred:.3f}")

    traces = sens + insens
    if args.csv:
        with open(args.csv, "w") as fh:
            write_trace_csv(traces, fh)
    if args.bound_csv:
        with open(args.bound_csv, "w") as fh:
            fh.write("run_id,source,max_workers,n,m,work_term,sync_term,predicted_units,"
                     "measured_seconds\n")
            for t, b in zip(sens, bounds):
                fh.write(f"{t.run_id},{t.source},{b.max_workers},{b.n},{b.m},{b.work_term!r},"
                         f"{b.sync_term!r},{b.predicted_units!r},{b.measured_seconds!r}\n")
    doc = aggregate_json(traces, table, bounds,
                         {"speedup_sweep": {str(p): t for p, t in sweep.items()}})
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(doc)
    return 0


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="edge-list file, or Matrix Market if it ends in .mtx")
    p.add_argument("--directed", action="store_true",
                   help="keep arcs as given (default: add reverse arcs)")
    p.add_argument("--vertices", type=int, default=None,
                   help="vertex count when the file's largest id undercounts it")
    p.add_argument("--grainsize", type=positive, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsbfs", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic edge list")
    gen.add_argument("kind", choices=("er", "rmat"))
    gen.add_argument("--n", type=positive, default=1000)
    gen.add_argument("--m", type=int, default=5000)
    gen.add_argument("--scale", type=int, default=10)
    gen.add_argument("--ef", type=int, default=16)
    gen.add_argument("--a", type=float, default=0.57)
    gen.add_argument("--b", type=float, default=0.19)
    gen.add_argument("--c", type=float, default=0.19)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    bfs = sub.add_parser("bfs", help="run the parallel BFS and print a summary")
    _graph_args(bfs)
    bfs.add_argument("--source", default="0", help="vertex id or random:<count>:<seed>")
    bfs.add_argument("--workers", "-P", type=positive, default=None)
    bfs.add_argument("--variant", choices=VARIANTS, default="sensitive")
    bfs.add_argument("--reps", type=positive, default=1)
    bfs.add_argument("--output", choices=("plain", "csv", "json"), default="plain")
    bfs.add_argument("--dump", default=None, help="write 'vertex distance' lines (-1 = unreached)")
    bfs.add_argument("--trace-csv", default=None)
    bfs.set_defaults(func=cmd_bfs)

    ver = sub.add_parser("verify", help="compare the parallel BFS with the serial oracle")
    _graph_args(ver)
    ver.add_argument("--sources", type=positive, default=20)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--workers", "-P", type=parse_int_list, default=[1, 2, 4, 8])
    ver.add_argument("--variant", choices=VARIANTS + ("both",), default="both")
    ver.add_argument("--corrupt-vertex", type=int, default=None, help=argparse.SUPPRESS)
    ver.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="compare work-sensitive and work-insensitive runs")
    _graph_args(bench)
    bench.add_argument("--sources", type=positive, default=10)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--reps", type=positive, default=5)
    bench.add_argument("--experiments", type=positive, default=1)
    bench.add_argument("--workers", "-P", type=positive, default=None)
    bench.add_argument("--sweep", type=parse_int_list, default=None,
                       help="comma-separated worker counts for a speedup sweep")
    bench.add_argument("--csv", default=None, help="per-step trace CSV")
    bench.add_argument("--json", default=None, help="aggregate JSON")
    bench.add_argument("--bound-csv", default=None)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, GraphFormatError, ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
