"""Work-sensitive, lock-free, level-synchronous parallel BFS (S3BFS).

Every level runs seven parallel steps, each launching ``min(P, work)``
workers (or all ``P`` in the work-insensitive baseline):

1. gather frontier degrees, 2. inclusive scan them, 3. locate each worker's
first edge, 4. explore an equal share of the level's edges, 5. keep only
vertices each worker still owns, 6. scan the surviving queue sizes and
7. copy the queues into the next frontier.

The only data races are the plain stores to ``d`` and ``owner`` in step 4.
All racing ``d`` stores write the same level.  The ``owner`` race is
resolved by step 5.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import UNREACHED, CsrGraph
from .primitives import (
    NATIVE,
    LoopReport,
    WorkerBudget,
    choose_workers,
    parallel_for_chunks,
    parallel_prefix_sum,
)
from .stats import LevelStats, StatsRecorder

VARIANTS = ("sensitive", "insensitive")


@dataclass(frozen=True)
class RunConfig:
    source: int
    max_workers: int
    variant: str = "sensitive"
    grainsize: int | None = None

    def __post_init__(self):
        if self.max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.grainsize is not None and self.grainsize < 1:
            raise ValueError("grainsize must be >= 1")


def step_budget(max_workers: int, work: int, variant: str = "sensitive") -> WorkerBudget | None:
    """Budget for a step with ``work`` items, or ``None`` when there is nothing to do."""
    if work <= 0:
        return None
    if variant == "insensitive":
        return WorkerBudget(max_workers, max_workers, pad=True)
    return WorkerBudget(max_workers, choose_workers(max_workers, work))


@dataclass
class BfsState:
    d: np.ndarray
    owner: np.ndarray
    frontier: np.ndarray
    level: int
    max_workers: int
    init_report: LoopReport = field(default_factory=LoopReport)

    @property
    def owner_sentinel(self) -> int:
        return self.max_workers


@dataclass
class LevelPlan:
    edge_sum: np.ndarray
    n_l: int
    e_l: int
    p_l: int
    sp_vertex: np.ndarray
    sp_offset: np.ndarray

    @property
    def chunk(self) -> int:
        """Longest per-worker edge segment, ``ceil(e_l / p_l)``."""
        return -(-self.e_l // self.p_l) if self.p_l else 0

    def segment(self, t: int) -> tuple[int, int]:
        return t * self.e_l // self.p_l, (t + 1) * self.e_l // self.p_l

    @property
    def start_points(self) -> list[tuple[int, int]]:
        return [(int(u), int(o)) for u, o in zip(self.sp_vertex, self.sp_offset)]


@dataclass
class WorkerQueues:
    """``p`` private queues packed in one buffer; queue ``t`` lives at ``[t*cap, t*cap + counts[t])``."""

    buffer: np.ndarray
    cap: int
    counts: np.ndarray
    scanned: np.ndarray
    sizes: np.ndarray | None = None

    @property
    def workers(self) -> int:
        return len(self.counts)

    @property
    def queues(self) -> list[list[int]]:
        lengths = self.counts
        if self.sizes is not None:
            lengths = np.diff(self.sizes, prepend=0)
        return [
            self.buffer[t * self.cap : t * self.cap + int(lengths[t])].tolist()
            for t in range(self.workers)
        ]

    @classmethod
    def from_lists(cls, queues: list[list[int]]) -> "WorkerQueues":
        cap = max((len(q) for q in queues), default=0)
        buf = np.zeros(max(1, cap * len(queues)), dtype=np.int64)
        for t, q in enumerate(queues):
            buf[t * cap : t * cap + len(q)] = q
        counts = np.array([len(q) for q in queues], dtype=np.int64)
        return cls(buf, cap, counts, counts.copy())


def init_state(g: CsrGraph, source: int, max_workers: int, *, variant: str = "sensitive",
               grainsize: int | None = None, runtime=None) -> BfsState:
    """Distances to ``UNREACHED`` and owners to the sentinel ``P``, then seed the source."""
    runtime = runtime or NATIVE
    n = g.vertex_count
    if not 0 <= source < n:
        raise ValueError(f"source {source} outside [0, {n})")
    if max_workers < 1:
        raise ValueError("max_workers must be >= 1")
    d = np.empty(n, dtype=np.int64)
    owner = np.empty(n, dtype=np.int64)
    fill = runtime.kernel(kernels.init_fill)

    def body(_w, lo, hi):
        fill(d, owner, lo, hi, max_workers)

    report = parallel_for_chunks(0, n, step_budget(max_workers, n, variant), body,
                                 grainsize, runtime)
    d[source] = 0
    owner[source] = 0
    frontier = np.array([source], dtype=np.int64)
    return BfsState(d, owner, frontier, 0, max_workers, report)


def find_start_points(edge_sum: np.ndarray, e_l: int, p_l: int, *,
                      budget: WorkerBudget | None = None, grainsize: int | None = None,
                      runtime=None, report: list | None = None):
    """First ``(frontier index, edge offset)`` of every worker, as two arrays.

    Worker ``t`` owns global edges ``[t*e_l//p_l, (t+1)*e_l//p_l)``, at most
    ``ceil(e_l / p_l)`` of them.  A parallel loop over frontier entries does the
    placement: entry ``u``, spanning edges ``[s_u, edge_sum[u])``, writes the
    start of every worker whose first edge falls in that span.  No worker
    searches.  When ``p_l > e_l`` (the padded baseline) some workers own
    empty segments.
    """
    runtime = runtime or NATIVE
    if e_l < 1 or p_l < 1:
        raise ValueError("need e_l >= 1 and p_l >= 1")
    n_l = len(edge_sum)
    sp_vertex = np.full(p_l, -1, dtype=np.int64)
    sp_offset = np.zeros(p_l, dtype=np.int64)
    kern = runtime.kernel(kernels.start_points_range)
    if budget is None:
        budget = step_budget(p_l, n_l)

    def body(_w, lo, hi):
        kern(edge_sum, e_l, p_l, lo, hi, sp_vertex, sp_offset)

    rep = parallel_for_chunks(0, n_l, budget, body, grainsize, runtime)
    if report is not None:
        report.append(rep)
    return sp_vertex, sp_offset


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _record(recorder, name, work, rep: LoopReport, elapsed):
    if recorder is not None:
        recorder.record_step(name, work, rep.workers, elapsed, rep.high_water, rep.depth)


def plan_level(g: CsrGraph, state: BfsState, max_workers: int, *, variant: str = "sensitive",
               grainsize: int | None = None, runtime=None,
               recorder: StatsRecorder | None = None) -> LevelPlan:
    """Degree gather, inclusive scan, worker count and start points for the current frontier."""
    runtime = runtime or NATIVE
    frontier = state.frontier
    n_l = len(frontier)
    if n_l == 0:
        raise ValueError("frontier is empty")
    budget = step_budget(max_workers, n_l, variant)
    edge_sum = np.empty(n_l, dtype=np.int64)
    gather = runtime.kernel(kernels.gather_degrees)
    offsets = g.offsets

    def body(_w, lo, hi):
        gather(offsets, frontier, edge_sum, lo, hi)

    with _Timer() as t:
        rep = parallel_for_chunks(0, n_l, budget, body, grainsize, runtime)
    _record(recorder, "gather", n_l, rep, t.elapsed)

    with _Timer() as t:
        rep = parallel_prefix_sum(edge_sum, n_l, budget, runtime)
    _record(recorder, "scan", n_l, rep, t.elapsed)

    e_l = int(edge_sum[n_l - 1])
    if variant == "insensitive":
        p_l = max_workers if e_l else 0
    else:
        p_l = choose_workers(max_workers, e_l)
    if p_l == 0:
        if recorder is not None:
            recorder.record_step("start_points", 0, 0, 0.0)
        empty = np.empty(0, dtype=np.int64)
        return LevelPlan(edge_sum, n_l, 0, 0, empty, empty.copy())

    reps: list = []
    with _Timer() as t:
        sp_vertex, sp_offset = find_start_points(
            edge_sum, e_l, p_l, budget=budget, grainsize=grainsize, runtime=runtime, report=reps
        )
    _record(recorder, "start_points", n_l, reps[0], t.elapsed)
    return LevelPlan(edge_sum, n_l, e_l, p_l, sp_vertex, sp_offset)


def explore_level(g: CsrGraph, state: BfsState, plan: LevelPlan, *, runtime=None,
                  recorder: StatsRecorder | None = None) -> WorkerQueues:
    """Each of ``p_l`` workers scans its edge segment and queues vertices it discovers.

    A discovery stores ``d[v] = level`` and ``owner[v] = t`` without any
    synchronisation.  Two workers may both discover ``v``; one owner id wins.
    """
    runtime = runtime or NATIVE
    p, cap, e_l = plan.p_l, plan.chunk, plan.e_l
    queue = np.empty(p * cap, dtype=np.int64)
    counts = np.zeros(p, dtype=np.int64)
    scanned = np.zeros(p, dtype=np.int64)
    explore = runtime.kernel(kernels.explore_segment)
    offsets, neighbors, frontier = g.offsets, g.neighbors, state.frontier
    sp_vertex, sp_offset = plan.sp_vertex, plan.sp_offset
    d, owner, level = state.d, state.owner, state.level

    def body(_w, lo, hi):
        for t in range(lo, hi):
            explore(offsets, neighbors, frontier, sp_vertex, sp_offset, t, p, e_l,
                    d, owner, level, queue, cap, counts, scanned)

    with _Timer() as tm:
        rep = parallel_for_chunks(0, p, WorkerBudget(max(p, state.max_workers), p), body, 1,
                                  runtime)
    _record(recorder, "explore", e_l, rep, tm.elapsed)
    return WorkerQueues(queue, cap, counts, scanned)


def dedup_queues(state: BfsState, queues: WorkerQueues, *, work_base: int | None = None,
                 runtime=None, recorder: StatsRecorder | None = None) -> WorkerQueues:
    """Keep ``v`` in queue ``i`` only if ``owner[v] == i``, then scan the queue sizes.

    ``queues.sizes`` ends up holding the inclusive scan of the surviving sizes.
    """
    runtime = runtime or NATIVE
    p = queues.workers
    base = p if work_base is None else work_base
    sizes = np.zeros(p, dtype=np.int64)
    filt = runtime.kernel(kernels.dedup_filter)
    owner, buf, cap, counts = state.owner, queues.buffer, queues.cap, queues.counts
    pre_total = int(counts.sum())

    def body(_w, lo, hi):
        for t in range(lo, hi):
            filt(owner, buf, cap, counts, sizes, t)

    budget = WorkerBudget(max(p, state.max_workers), p)
    with _Timer() as tm:
        rep = parallel_for_chunks(0, p, budget, body, 1, runtime)
    _record(recorder, "dedup", base + pre_total, rep, tm.elapsed)
    with _Timer() as tm:
        rep = parallel_prefix_sum(sizes, p, budget, runtime)
    _record(recorder, "size_scan", base, rep, tm.elapsed)
    queues.sizes = sizes
    return queues


def linearize(queues: WorkerQueues, *, max_workers: int | None = None,
              work_base: int | None = None, runtime=None,
              recorder: StatsRecorder | None = None) -> np.ndarray:
    """Copy queue ``i`` to ``[sizes[i-1], sizes[i])`` of a fresh frontier array."""
    runtime = runtime or NATIVE
    p = queues.workers
    sizes = queues.sizes
    total = int(sizes[p - 1]) if p else 0
    out = np.empty(total, dtype=np.int64)
    copy = runtime.kernel(kernels.linearize_copy)
    buf, cap = queues.buffer, queues.cap
    base = p if work_base is None else work_base

    def body(_w, lo, hi):
        for t in range(lo, hi):
            copy(buf, cap, sizes, t, out)

    if p:
        budget = WorkerBudget(max(p, max_workers or p), p)
        with _Timer() as tm:
            rep = parallel_for_chunks(0, p, budget, body, 1, runtime)
        _record(recorder, "linearize", base + total, rep, tm.elapsed)
    return out


@dataclass
class BfsResult:
    distances: np.ndarray
    levels: list[LevelStats]
    init_time: float = 0.0
    total_time: float = 0.0
    frontiers: list[np.ndarray] | None = None
    owner: np.ndarray | None = None


def run_bfs(g: CsrGraph, config: RunConfig, *, runtime=None, record_frontiers: bool = False,
            recorder: StatsRecorder | None = None) -> BfsResult:
    """Traverse from ``config.source`` level by level until the frontier empties."""
    runtime = runtime or NATIVE
    recorder = recorder or StatsRecorder()
    P, variant, gs = config.max_workers, config.variant, config.grainsize
    t_start = time.perf_counter()
    state = init_state(g, config.source, P, variant=variant, grainsize=gs, runtime=runtime)
    init_time = time.perf_counter() - t_start
    frontiers = [state.frontier] if record_frontiers else None

    while len(state.frontier) > 0:
        state.level += 1
        lvl = recorder.open_level(state.level, len(state.frontier))
        plan = plan_level(g, state, P, variant=variant, grainsize=gs, runtime=runtime,
                          recorder=recorder)
        # step work is counted against the work-sensitive worker count in both variants
        p_star = choose_workers(P, plan.e_l)
        if plan.p_l == 0:
            for name in ("explore", "dedup", "size_scan", "linearize"):
                recorder.record_step(name, 0, 0, 0.0)
            state.frontier = np.empty(0, dtype=np.int64)
        else:
            queues = explore_level(g, state, plan, runtime=runtime, recorder=recorder)
            lvl.arcs_scanned = int(queues.scanned.sum())
            lvl.discovered = int(queues.counts.sum())
            dedup_queues(state, queues, work_base=p_star, runtime=runtime, recorder=recorder)
            state.frontier = linearize(queues, max_workers=P, work_base=p_star,
                                       runtime=runtime, recorder=recorder)
            lvl.kept = len(state.frontier)
        recorder.close_level(plan.e_l)
        if record_frontiers:
            frontiers.append(state.frontier)

    return BfsResult(state.d, recorder.levels, init_time, time.perf_counter() - t_start,
                     frontiers, state.owner)
