"""Parallel-for over an index range and a parallel inclusive prefix sum.

Both take an explicit worker budget.  The loop launches its workers through a
recursive binary spawn tree.  Each worker gets a stable index in
``[0, active_workers)``, and the call returns only after every worker has
finished, so returning acts as a full barrier.
"""

from __future__ import annotations

import math
import os
import threading
import time
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels

ChunkBody = Callable[[int, int, int], None]


@dataclass(frozen=True)
class WorkerBudget:
    """``max_workers`` is the machine budget, ``active_workers`` what this loop launches.

    ``pad`` launches all ``active_workers`` even when the range is shorter, which is
    how the work-insensitive variant keeps every core busy.
    """

    max_workers: int
    active_workers: int
    pad: bool = False

    def __post_init__(self):
        if self.max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        if not 1 <= self.active_workers <= self.max_workers:
            raise ValueError(
                f"active_workers={self.active_workers} not in [1, {self.max_workers}]"
            )


def choose_workers(max_workers: int, work_items: int) -> int:
    """``min(max_workers, work_items)``; zero work launches nobody."""
    if max_workers < 1:
        raise ValueError("max_workers must be >= 1")
    if work_items < 0:
        raise ValueError("work_items must be >= 0")
    return min(max_workers, work_items)


def default_grainsize(length: int, active_workers: int) -> int:
    return max(1, -(-length // active_workers))


@dataclass
class LoopReport:
    """What one parallel loop actually did."""

    workers: int = 0
    depth: int = 0
    intervals: list = field(default_factory=list)

    @property
    def high_water(self) -> int:
        return high_water(self.intervals)

    def merge(self, other: "LoopReport") -> "LoopReport":
        return LoopReport(
            max(self.workers, other.workers),
            max(self.depth, other.depth),
            self.intervals + [None] + other.intervals,
        )


def high_water(intervals) -> int:
    """Maximum number of simultaneously open ``(start_ns, end_ns)`` intervals.

    A ``None`` entry separates loops that were ordered by a barrier.
    """
    best = 0
    group: list = []
    for iv in list(intervals) + [None]:
        if iv is not None:
            group.append(iv)
            continue
        events = sorted([(s, 1) for s, _ in group] + [(e, -1) for _, e in group])
        cur = 0
        for _, delta in events:
            cur += delta
            best = max(best, cur)
        group = []
    return best


_pool: ThreadPoolExecutor | None = None
_pool_size = 0
_pool_guard = threading.Lock()


def _executor(needed: int) -> ThreadPoolExecutor:
    # A k-worker spawn tree parks k - 1 pool threads on their children's futures,
    # so the pool must hold at least that many; ThreadPoolExecutor only adds a
    # thread when none is idle.  Outgrown pools are left to drain, not shut down.
    global _pool, _pool_size
    if _pool is None or _pool_size < needed:
        with _pool_guard:
            if _pool is None or _pool_size < needed:
                _pool_size = max(needed, 2 * _pool_size, 256, 8 * (os.cpu_count() or 1))
                _pool = ThreadPoolExecutor(max_workers=_pool_size, thread_name_prefix="wsbfs")
    return _pool


class NativeRuntime:
    """Runs workers on pooled threads; kernels run compiled and release the GIL."""

    def run_tree(self, k: int, leaf: Callable[[int], None]) -> int:
        """Run ``leaf(w)`` for ``w in range(k)`` through a binary spawn tree; return its depth."""
        if k == 1:
            leaf(0)
            return 0
        pool = _executor(k)

        def node(lo: int, hi: int) -> None:
            if hi - lo == 1:
                leaf(lo)
                return
            mid = (lo + hi) // 2
            fut = pool.submit(node, mid, hi)
            try:
                node(lo, mid)
            finally:
                fut.result()

        node(0, k)
        return math.ceil(math.log2(k))

    def kernel(self, fn):
        return fn


NATIVE = NativeRuntime()


def _layout(length: int, budget: WorkerBudget, grainsize: int | None):
    """Split ``[0, length)`` into per-worker lists of ``(lo, hi)`` chunks."""
    a = budget.active_workers
    if grainsize is None:
        k = a if budget.pad else min(a, length)
        return [[(w * length // k, (w + 1) * length // k)] for w in range(k)]
    if grainsize < 1:
        raise ValueError("grainsize must be >= 1")
    leaves = -(-length // grainsize)
    k = a if budget.pad else min(a, leaves)
    plan = []
    for w in range(k):
        c0, c1 = w * leaves // k, (w + 1) * leaves // k
        plan.append([(c * grainsize, min((c + 1) * grainsize, length)) for c in range(c0, c1)])
    return plan


def parallel_for_chunks(
    lo: int,
    hi: int,
    budget: WorkerBudget,
    body: ChunkBody,
    grainsize: int | None = None,
    runtime=None,
) -> LoopReport:
    """Call ``body(worker, chunk_lo, chunk_hi)`` over ``[lo, hi)``.

    With the default grainsize the range is cut into ``active_workers`` near
    equal pieces (each at most ``ceil(len / active_workers)`` long).  An explicit
    grainsize cuts fixed-size chunks and hands each worker a contiguous run of
    them.  An exception in any body stops workers from starting new chunks and
    is re-raised once every started chunk has finished.
    """
    runtime = runtime or NATIVE
    length = hi - lo
    if length < 0:
        raise ValueError("hi < lo")
    if length == 0 and not budget.pad:
        return LoopReport()
    plan = _layout(length, budget, grainsize)
    k = len(plan)
    intervals: list = [None] * k
    errors: list = [None] * k
    abort = [False]

    def leaf(w: int) -> None:
        t0 = time.perf_counter_ns()
        try:
            for c_lo, c_hi in plan[w]:
                if abort[0]:
                    break
                body(w, lo + c_lo, lo + c_hi)
        except BaseException as exc:  # noqa: BLE001 - re-raised after the barrier
            errors[w] = exc
            abort[0] = True
        intervals[w] = (t0, time.perf_counter_ns())

    depth = runtime.run_tree(k, leaf)
    for exc in errors:
        if exc is not None:
            raise exc
    return LoopReport(k, depth, intervals)


def parallel_for(
    lo: int,
    hi: int,
    budget: WorkerBudget,
    body: Callable[[int], None],
    grainsize: int | None = None,
    runtime=None,
) -> LoopReport:
    """Call ``body(i)`` exactly once for every ``i`` in ``[lo, hi)``."""

    def chunk(_w: int, c_lo: int, c_hi: int) -> None:
        for i in range(c_lo, c_hi):
            body(i)

    return parallel_for_chunks(lo, hi, budget, chunk, grainsize, runtime)


def parallel_prefix_sum(
    values: np.ndarray, length: int, budget: WorkerBudget, runtime=None
) -> LoopReport:
    """In-place inclusive scan of ``values[:length]`` (int64).

    Two-pass blocked scan: every worker scans its own block and publishes the
    block total, the at most ``active_workers`` totals are scanned serially,
    then every worker adds its block's offset.  Integer arithmetic only, so
    the result does not depend on the budget.  Raises ``OverflowError`` if the
    running sum leaves int64.
    """
    runtime = runtime or NATIVE
    if length < 0 or length > len(values):
        raise ValueError("length out of range")
    if length == 0:
        return LoopReport()
    k = len(_layout(length, budget, None))
    totals = np.zeros(k, dtype=np.int64)
    flags = np.ones(k, dtype=np.int64)
    scan_local = runtime.kernel(kernels.scan_local)
    add_offset = runtime.kernel(kernels.add_offset)

    def local(w: int, c_lo: int, c_hi: int) -> None:
        scan_local(values, c_lo, c_hi, totals, flags, w)

    first = parallel_for_chunks(0, length, budget, local, runtime=runtime)
    if not flags.all():
        raise OverflowError("prefix sum overflows int64")
    offsets = np.zeros(k, dtype=np.int64)
    running = 0
    for w in range(k - 1):
        t = int(totals[w])
        if t > kernels.INDEX_MAX - running:
            raise OverflowError("prefix sum overflows int64")
        running += t
        offsets[w + 1] = running
    if int(totals[k - 1]) > kernels.INDEX_MAX - running:
        raise OverflowError("prefix sum overflows int64")

    def add_back(w: int, c_lo: int, c_hi: int) -> None:
        if w:
            add_offset(values, c_lo, c_hi, offsets, w)

    second = parallel_for_chunks(0, length, budget, add_back, runtime=runtime)
    return first.merge(second)
