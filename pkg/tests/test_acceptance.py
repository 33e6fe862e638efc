"""Exit criteria.  Each test records one PASS/FAIL line shown in the terminal summary."""

import io
import itertools
import math
import os
import statistics
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, path_graph, star_graph
from wsbfs.graph import (
    UNREACHED,
    build_csr,
    generate_erdos_renyi,
    generate_rmat,
    reachable_arc_count,
    serial_bfs,
)
from wsbfs.instrumentation import compare_variants, evaluate_bound, read_trace_csv, traced_run
from wsbfs.instrumentation import write_trace_csv
from wsbfs.primitives import WorkerBudget, parallel_prefix_sum
from wsbfs.racecheck import InterleavedRuntime, summarize
from wsbfs.s3bfs import RunConfig, run_bfs

P_VALUES = (1, 2, 3, 4, 8, 16)


def report(number, title, ok, detail="", advisory=False):
    tag = "PASS" if ok else ("ADVISORY-FAIL" if advisory else "FAIL")
    line = f"[{tag}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _sources(n, count, seed):
    return np.random.default_rng(seed).integers(0, n, count).tolist()


def _disconnected():
    a = generate_erdos_renyi(400, 900, 21)
    b = generate_erdos_renyi(300, 500, 22) + 400
    # 100 isolated vertices at the top end
    return build_csr(np.concatenate([a, b]), 800, symmetrize=True)


@pytest.fixture(scope="module")
def graph_suite():
    """(name, graph, sources) covering every family the criteria list."""
    suite = [
        ("er_1e5", build_csr(generate_erdos_renyi(100_000, 400_000, 1), 100_000, True), 10),
        ("er_1e4", build_csr(generate_erdos_renyi(10_000, 30_000, 2), 10_000, True), 40),
        ("er_sparse_dir", build_csr(generate_erdos_renyi(2_000, 3_000, 3), 2_000, False), 30),
        ("rmat_14", build_csr(generate_rmat(14, 8, seed=4), 1 << 14, True), 10),
        ("rmat_10_dir", build_csr(generate_rmat(10, 8, seed=5), 1 << 10, False), 30),
        ("path", path_graph(120), 20),
        ("star", star_graph(300), 20),
        ("disconnected", _disconnected(), 50),
        ("single", build_csr([], 1), 1),
        ("single_loop", build_csr([(0, 0)], 1), 1),
    ]
    out = []
    for k, (name, g, count) in enumerate(suite):
        srcs = _sources(g.vertex_count, count, 100 + k)
        if name == "star":
            srcs[0] = 0
        out.append((name, g, srcs))
    return out


def test_criterion_1_oracle_equivalence(graph_suite):
    pairs = sum(len(s) for _, _, s in graph_suite)
    runs = 0
    mismatches = []
    t0 = time.perf_counter()
    for name, g, sources in graph_suite:
        for src in sources:
            oracle = serial_bfs(g, src)
            for P in P_VALUES:
                for variant in ("sensitive", "insensitive"):
                    d = run_bfs(g, RunConfig(src, P, variant)).distances
                    runs += 1
                    if not np.array_equal(d, oracle):
                        mismatches.append((name, src, P, variant))
    elapsed = time.perf_counter() - t0
    ok = pairs >= 200 and not mismatches and elapsed < 300
    report(1, "oracle equivalence", ok,
           f"{pairs} pairs, {runs} runs, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert pairs >= 200
    assert not mismatches, mismatches[:5]
    assert elapsed < 300


def test_criterion_2_scan_correctness():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad = 0
    for k in range(100):
        length = int(rng.integers(0, 10**6 + 1)) if k else 10**6
        vals = rng.integers(0, 2**20, size=length, dtype=np.int64)
        expected = np.fromiter(itertools.accumulate(vals.tolist()), dtype=np.int64, count=length)
        w1, w2 = (int(x) for x in rng.integers(1, 17, 2))
        a, b = vals.copy(), vals.copy()
        parallel_prefix_sum(a, length, WorkerBudget(16, w1))
        parallel_prefix_sum(b, length, WorkerBudget(16, w2))
        if a.tobytes() != expected.tobytes() or b.tobytes() != expected.tobytes():
            bad += 1
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 60
    report(2, "scan correctness", ok, f"100 arrays, {bad} mismatches, {elapsed:.1f}s")
    assert bad == 0
    assert elapsed < 60


def _check_work_sensitivity(levels, P, variant):
    errs = []
    for lvl in levels:
        for s in lvl.steps:
            cap = min(P, s.work_items)
            if variant == "sensitive":
                if s.high_water > cap or s.workers_used > cap:
                    errs.append((lvl.level, s.step_name, s.work_items, s.workers_used, s.high_water))
            else:
                expected = P if s.work_items >= 1 else 0
                if s.workers_used != expected:
                    errs.append((lvl.level, s.step_name, s.work_items, s.workers_used))
    return errs


def test_criterion_3_work_sensitivity(graph_suite):
    errors = []
    checked = 0
    for name, g, sources in graph_suite:
        for src in sources[:4]:
            for P in P_VALUES:
                for variant in ("sensitive", "insensitive"):
                    r = run_bfs(g, RunConfig(src, P, variant))
                    errors += _check_work_sensitivity(r.levels, P, variant)
                    checked += sum(len(lvl.steps) for lvl in r.levels)
    report(3, "work-sensitivity invariant", not errors,
           f"{checked} steps checked, {len(errors)} violations")
    assert not errors, errors[:5]


def test_criterion_4_work_accounting(graph_suite):
    exact_bad, bound_bad, runs = [], [], 0
    for name, g, sources in graph_suite:
        degrees = g.degrees()
        for src in sources[:6]:
            oracle = serial_bfs(g, src)
            reach = oracle != UNREACHED
            m_r, n_r = int(degrees[reach].sum()), int(reach.sum())
            for P in (1, 4, 16):
                for variant in ("sensitive", "insensitive"):
                    r = run_bfs(g, RunConfig(src, P, variant))
                    runs += 1
                    explore = sum(lvl.step("explore").work_items for lvl in r.levels)
                    scanned = sum(lvl.arcs_scanned for lvl in r.levels)
                    if explore != m_r or scanned != m_r or m_r != reachable_arc_count(g, oracle):
                        exact_bad.append((name, src, P, variant, explore, m_r))
                    total = sum(lvl.w_l for lvl in r.levels)
                    if total > 7 * (m_r + n_r):
                        bound_bad.append((name, src, P, variant, total, m_r + n_r))
    ok = not exact_bad and not bound_bad
    report(4, "work accounting", ok,
           f"{runs} runs, {len(exact_bad)} explore-count errors, {len(bound_bad)} bound breaches")
    assert not exact_bad, exact_bad[:5]
    assert not bound_bad, bound_bad[:5]


def _energy_graph(P):
    """Two sparse levels (1 then 2 arcs), then a hub opening onto a dense core."""
    rng = np.random.default_rng(7)
    s, a, hub = 0, 1, 2
    fan = np.arange(3, 3 + 8 * P)
    core0 = int(fan[-1]) + 1
    core = 6000
    edges = [(s, a), (a, hub)] + [(hub, int(f)) for f in fan]
    edges += [(int(f), core0 + int(x)) for f in fan for x in rng.integers(0, core, 40)]
    inner = rng.integers(0, core, size=(core * 4, 2)) + core0
    return build_csr(np.concatenate([np.array(edges), inner]), core0 + core, symmetrize=True)


def test_criterion_5_energy_proxy_direction():
    P, reps = 8, 20
    g = _energy_graph(P)
    comp = compare_variants(g, [0], P, reps, verify=True)
    levels = comp.sensitive[0].levels
    sparse = [lvl.level for lvl in levels[:2]]
    assert all(lvl.e_l < P / 2 for lvl in levels[:2])
    dense = [lvl.level for lvl in levels if lvl.e_l > 100 * P]
    assert dense
    sparse_ratios = {lv: comp.table.level(lv).core_ratio for lv in sparse}
    dense_ratios = {lv: comp.table.level(lv).core_ratio for lv in dense}
    ok = all(r > 1 for r in sparse_ratios.values()) and all(
        0.5 <= r <= 2.0 for r in dense_ratios.values())
    fmt = lambda d: ", ".join(f"L{k}={v:.2f}" for k, v in d.items())  # noqa: E731
    report(5, "energy-proxy direction", ok,
           f"P={P} reps={reps}; sparse {fmt(sparse_ratios)}; dense {fmt(dense_ratios)}")
    assert all(r > 1 for r in sparse_ratios.values()), sparse_ratios
    assert all(0.5 <= r <= 2.0 for r in dense_ratios.values()), dense_ratios


def _physical_cores():
    try:
        import psutil

        return psutil.cpu_count(logical=False) or os.cpu_count() or 1
    except ImportError:
        return os.cpu_count() or 1


@pytest.mark.slow
def test_criterion_6_desk_speedup_advisory():
    cores = _physical_cores()
    n, m = 10**6, 10**7
    g = build_csr(generate_erdos_renyi(n, m, 6), n, symmetrize=True)
    run_bfs(g, RunConfig(0, 4))
    times = {}
    for P in (1, 4):
        times[P] = statistics.median(
            run_bfs(g, RunConfig(0, P)).total_time for _ in range(5))
    ratio = times[4] / times[1]
    ok = cores >= 4 and ratio <= 0.6
    detail = (f"{cores} physical cores; median P=1 {times[1]:.3f}s, P=4 {times[4]:.3f}s, "
              f"ratio {ratio:.2f} (target <= 0.6)")
    if cores < 4:
        detail += "; not attainable on this machine, reported only"
    report(6, "desk-scale speedup [advisory]", ok, detail, advisory=True)


def test_criterion_7_bound_evaluation():
    n = 5000
    g = build_csr(generate_erdos_renyi(n, 20_000, 7), n, symmetrize=True)
    traces = [traced_run(g, RunConfig(src, 8), i)[1] for i, src in enumerate((0, 11, 4999))]
    rows = read_trace_csv(io.StringIO(write_trace_csv(traces)))
    worst = 0.0
    for tr in traces:
        work = {}
        for r in rows:
            if r["run_id"] == tr.run_id:
                work[r["level"]] = work.get(r["level"], 0) + r["work_items"]
        independent = (g.edge_count + n) / 8 + sum(
            math.log2(min(8, w)) for w in work.values() if w > 0)
        got = evaluate_bound(tr.levels, 8, n, g.edge_count).predicted_units
        worst = max(worst, abs(got - independent) / abs(independent))
    serial = evaluate_bound(traces[0].levels, 1, n, g.edge_count).predicted_units
    ok = worst <= 1e-9 and serial == n + g.edge_count
    report(7, "bound evaluation", ok,
           f"max rel err {worst:.2e}; P=1 predicted {serial} vs m+n {n + g.edge_count}")
    assert worst <= 1e-9
    assert serial == n + g.edge_count


def test_criterion_8_race_confinement():
    cases = [
        (build_csr(generate_erdos_renyi(400, 1500, 81), 400, True), 0, 4),
        (build_csr(generate_erdos_renyi(300, 1200, 82), 300, False), 3, 8),
        (build_csr(generate_rmat(8, 6, seed=83), 256, True), 1, 8),
        (build_csr([(0, 1), (0, 2), (1, 3), (2, 3)], 4), 0, 2),
        (star_graph(40), 5, 3),
    ]
    runs = 0
    bad_locations, bad_values, dist_mismatch, dup_frontiers = set(), 0, 0, 0
    duplicates_resolved = 0
    for case, (g, src, P) in enumerate(cases):
        oracle = serial_bfs(g, src)
        first = None
        for seed in range(10):
            rt = InterleavedRuntime(1000 * case + seed, preempt=0.5)
            r = run_bfs(g, RunConfig(src, P), runtime=rt, record_frontiers=True)
            runs += 1
            for key in summarize(rt.races):
                if key not in {("explore", "d"), ("explore", "owner")}:
                    bad_locations.add(key)
            bad_values += sum(not race.complete_value for race in rt.races)
            first = r.distances if first is None else first
            if not (np.array_equal(r.distances, first) and np.array_equal(r.distances, oracle)):
                dist_mismatch += 1
            dup_frontiers += sum(len(set(f.tolist())) != len(f) for f in r.frontiers)
            duplicates_resolved += sum(lvl.discovered - lvl.kept for lvl in r.levels)
    ok = runs >= 50 and not bad_locations and not bad_values and not dist_mismatch \
        and not dup_frontiers
    report(8, "race confinement", ok,
           f"{runs} interleaved runs; racing locations outside explore d/owner: "
           f"{sorted(bad_locations) or 'none'}; torn values {bad_values}; distance mismatches "
           f"{dist_mismatch}; duplicate frontiers {dup_frontiers}; "
           f"cross-worker duplicate discoveries resolved {duplicates_resolved}")
    assert runs >= 50
    assert not bad_locations
    assert bad_values == 0 and dist_mismatch == 0 and dup_frontiers == 0
