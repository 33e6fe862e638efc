"""Bound evaluation, work-sensitive vs. work-insensitive comparison and trace export.

The energy proxy is core-seconds: ``workers_used * wall_time`` summed over
steps.  Measured joules can be attached afterwards from an external counter
log (``timestamp_s,joules`` rows of a cumulative reading) via
``attribute_energy``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import CsrGraph, serial_bfs
from .s3bfs import RunConfig, run_bfs
from .stats import LevelStats, RunTrace, StatsRecorder

CSV_COLUMNS = (
    "run_id", "source", "variant", "level", "step",
    "work_items", "workers_used", "wall_time_s", "core_time_s",
)


@dataclass
class BoundReport:
    max_workers: int
    n: int
    m: int
    work_term: float
    sync_term: float
    measured_seconds: float = 0.0
    per_level: list[dict] = field(default_factory=list)

    @property
    def predicted_units(self) -> float:
        return self.work_term + self.sync_term

    def to_dict(self) -> dict:
        out = asdict(self)
        out["predicted_units"] = self.predicted_units
        return out


def level_sync_cost(max_workers: int, w_l: int) -> float:
    """``log2(min(P, w_l))``, with empty levels costing nothing."""
    if w_l <= 0:
        return 0.0
    return math.log2(min(max_workers, w_l))


def evaluate_bound(levels, max_workers: int, n: int, m: int,
                   measured_seconds: float = 0.0) -> BoundReport:
    """Lower bound ``(m + n) / P + sum_l log2 min(P, W_l)`` for a recorded run.

    ``levels`` is a sequence of ``LevelStats`` or plain per-level work totals.
    """
    if max_workers < 1:
        raise ValueError("max_workers must be >= 1")
    per_level = []
    sync = 0.0
    for k, lvl in enumerate(levels, 1):
        if isinstance(lvl, LevelStats):
            level, w = lvl.level, lvl.w_l
        else:
            level, w = k, int(lvl)
        cost = level_sync_cost(max_workers, w)
        sync += cost
        per_level.append({"level": level, "w_l": w, "sync_units": cost})
    return BoundReport(max_workers, n, m, (m + n) / max_workers, sync, measured_seconds,
                       per_level)


def traced_run(g: CsrGraph, config: RunConfig, run_id: int = 0, runtime=None):
    """``run_bfs`` wrapped into a ``RunTrace`` with wall-clock markers for energy alignment."""
    start = time.time()
    result = run_bfs(g, config, runtime=runtime, recorder=StatsRecorder())
    trace = RunTrace(run_id, config.source, config.variant, config.max_workers,
                     result.levels, result.init_time, result.total_time, start, time.time())
    return result, trace


@dataclass
class LevelRatio:
    level: int
    runs: int
    mean_work: float
    base_wall: float
    other_wall: float
    base_core: float
    other_core: float

    @property
    def wall_ratio(self) -> float:
        return _ratio(self.other_wall, self.base_wall)

    @property
    def core_ratio(self) -> float:
        return _ratio(self.other_core, self.base_core)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(wall_ratio=self.wall_ratio, core_ratio=self.core_ratio)
        return out


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return math.nan if num == 0 else math.inf
    return num / den


@dataclass
class RatioTable:
    """Per-level mean ratios ``other / base``; above 1 means the base variant did better."""

    levels: list[LevelRatio]
    wall_ratio: float
    core_ratio: float

    def level(self, level: int) -> LevelRatio:
        for row in self.levels:
            if row.level == level:
                return row
        raise KeyError(level)

    def to_dict(self) -> dict:
        return {
            "levels": [r.to_dict() for r in self.levels],
            "wall_ratio": self.wall_ratio,
            "core_ratio": self.core_ratio,
        }


def _level_means(traces):
    acc = defaultdict(lambda: [0, 0.0, 0.0, 0.0])
    for tr in traces:
        for lvl in tr.levels:
            a = acc[lvl.level]
            a[0] += 1
            a[1] += lvl.wall_time
            a[2] += lvl.core_time
            a[3] += lvl.max_step_work
    return {k: (c, w / c, core / c, mw / c) for k, (c, w, core, mw) in acc.items()}


def ratio_table(base: list[RunTrace], other: list[RunTrace]) -> RatioTable:
    """Average each level over its runs, then divide ``other`` by ``base``."""
    mb, mo = _level_means(base), _level_means(other)
    rows = []
    for level in sorted(set(mb) & set(mo)):
        cb, wb, kb, work = mb[level]
        _, wo, ko, _ = mo[level]
        rows.append(LevelRatio(level, cb, work, wb, wo, kb, ko))
    tot = lambda trs, attr: sum(getattr(l, attr) for t in trs for l in t.levels)  # noqa: E731
    return RatioTable(
        rows,
        _ratio(tot(other, "wall_time"), tot(base, "wall_time")),
        _ratio(tot(other, "core_time"), tot(base, "core_time")),
    )


@dataclass
class Comparison:
    sensitive: list[RunTrace]
    insensitive: list[RunTrace]
    table: RatioTable

    @property
    def traces(self) -> list[RunTrace]:
        return self.sensitive + self.insensitive


def compare_variants(g: CsrGraph, sources, max_workers: int, reps: int, *,
                     grainsize: int | None = None, runtime=None,
                     verify: bool = False, warmup: bool = True) -> Comparison:
    """Run both variants ``reps`` times per source; ratios are insensitive / sensitive.

    Variant order alternates between repetitions so drift hits both sides.
    With ``verify`` every run's distances are checked against ``serial_bfs``.
    ``warmup`` runs each variant once untimed first, to keep JIT loading out of the data.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    sources = list(sources)
    if warmup and sources:
        for variant in ("sensitive", "insensitive"):
            run_bfs(g, RunConfig(int(sources[0]), max_workers, variant, grainsize),
                    runtime=runtime)
    out = {"sensitive": [], "insensitive": []}
    run_id = 0
    for source in sources:
        oracle = serial_bfs(g, int(source)) if verify else None
        for rep in range(reps):
            order = ("sensitive", "insensitive") if rep % 2 == 0 else ("insensitive", "sensitive")
            for variant in order:
                cfg = RunConfig(int(source), max_workers, variant, grainsize)
                result, trace = traced_run(g, cfg, run_id, runtime)
                if oracle is not None and not np.array_equal(result.distances, oracle):
                    raise AssertionError(f"{variant} run from {source} disagrees with serial BFS")
                out[variant].append(trace)
                run_id += 1
    return Comparison(out["sensitive"], out["insensitive"],
                      ratio_table(out["sensitive"], out["insensitive"]))


def trace_rows(traces):
    for tr in traces:
        for lvl in tr.levels:
            for s in lvl.steps:
                yield {
                    "run_id": tr.run_id, "source": tr.source, "variant": tr.variant,
                    "level": lvl.level, "step": s.step_name, "work_items": s.work_items,
                    "workers_used": s.workers_used, "wall_time_s": repr(s.wall_time),
                    "core_time_s": repr(s.core_time),
                }


def write_trace_csv(traces, fh=None) -> str | None:
    """Write the per-step trace; returns the text when no file handle is given."""
    buf = fh if fh is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(trace_rows(traces))
    return None if fh is not None else buf.getvalue()


def read_trace_csv(fh) -> list[dict]:
    rows = []
    for row in csv.DictReader(fh):
        for key in ("run_id", "source", "level", "work_items", "workers_used"):
            row[key] = int(row[key])
        for key in ("wall_time_s", "core_time_s"):
            row[key] = float(row[key])
        rows.append(row)
    return rows


def per_level_means(traces) -> list[dict]:
    by_variant = defaultdict(list)
    for tr in traces:
        by_variant[tr.variant].append(tr)
    out = []
    for variant, trs in sorted(by_variant.items()):
        for level, (count, wall, core, work) in sorted(_level_means(trs).items()):
            out.append({"variant": variant, "level": level, "runs": count,
                        "wall_time_s": wall, "core_time_s": core, "max_step_work": work})
    return out


def aggregate_json(traces, table: RatioTable | None = None,
                   bounds: list[BoundReport] | None = None, extra: dict | None = None) -> str:
    doc = {"per_level_means": per_level_means(traces)}
    if table is not None:
        doc["ratio_table"] = table.to_dict()
    if bounds is not None:
        doc["bound_reports"] = [b.to_dict() for b in bounds]
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, default=_json_default)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    raise TypeError(type(x))


def load_energy_csv(fh) -> tuple[np.ndarray, np.ndarray]:
    """Read ``timestamp_s,joules`` samples of a cumulative energy counter, sorted by time."""
    ts, js = [], []
    for lineno, row in enumerate(csv.reader(fh), 1):
        if not row or row[0].startswith("#"):
            continue
        if lineno == 1 and row[0].strip() == "timestamp_s":
            continue
        if len(row) != 2:
            raise ValueError(f"line {lineno}: expected timestamp_s,joules")
        ts.append(float(row[0]))
        js.append(float(row[1]))
    order = np.argsort(ts, kind="stable")
    return np.asarray(ts)[order], np.asarray(js)[order]


def attribute_energy(samples, traces) -> dict[int, float]:
    """Joules per run, from the counter interpolated at each run's start/end markers."""
    ts, js = samples
    if len(ts) < 2:
        raise ValueError("need at least two energy samples")
    out = {}
    for tr in traces:
        if tr.start_stamp < ts[0] or tr.end_stamp > ts[-1]:
            continue
        out[tr.run_id] = float(np.interp(tr.end_stamp, ts, js) - np.interp(tr.start_stamp, ts, js))
    return out
