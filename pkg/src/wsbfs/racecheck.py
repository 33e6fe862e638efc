"""Randomised-interleaving runtime with a fork-join determinacy-race detector.

``InterleavedRuntime`` runs each worker of a parallel loop on its own thread,
but only one thread holds the execution token at a time.  Before every array
access the holder may hand the token to a randomly chosen live worker, so a
seed fixes the interleaving exactly.  Kernels run as plain Python
(``py_func``) on ``TracedArray`` views that log each access against the
current loop (a *phase*) and worker.

All workers of one loop are logically parallel.  A location that two
different workers touch in the same phase, with at least one writing, is a
race, whatever order the scheduler happened to pick.
"""

from __future__ import annotations

import inspect
import math
import random
import threading
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

_PHASE_NAMES = {
    "init_fill": "init",
    "gather_degrees": "gather",
    "scan_local": "scan",
    "add_offset": "scan",
    "start_points_range": "start_points",
    "explore_segment": "explore",
    "dedup_filter": "dedup",
    "linearize_copy": "linearize",
}


@dataclass
class Race:
    phase: str
    array: str
    index: int
    workers: tuple[int, ...]
    written: tuple[int, ...]
    final: int

    @property
    def complete_value(self) -> bool:
        """The value left after the barrier is one of the values written (or never written)."""
        return not self.written or self.final in self.written


@dataclass
class _Cell:
    writers: set = field(default_factory=set)
    readers: set = field(default_factory=set)
    values: list = field(default_factory=list)


class _Scheduler:
    def __init__(self, rng: random.Random, preempt: float):
        self.rng = rng
        self.preempt = preempt
        self.cond = threading.Condition()
        self.current = None
        self.alive: list[int] = []
        self.switches = 0

    def run(self, k: int, fn, tls) -> None:
        self.alive = list(range(k))
        self.current = self.rng.choice(self.alive)

        def worker(w: int) -> None:
            tls.worker = w
            with self.cond:
                self.cond.wait_for(lambda: self.current == w)
            try:
                fn(w)
            finally:
                with self.cond:
                    self.alive.remove(w)
                    self.current = self.rng.choice(self.alive) if self.alive else None
                    self.cond.notify_all()

        threads = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(k)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()

    def point(self, w: int) -> None:
        if len(self.alive) < 2 or self.rng.random() >= self.preempt:
            return
        nxt = self.rng.choice(self.alive)
        if nxt == w:
            return
        with self.cond:
            self.switches += 1
            self.current = nxt
            self.cond.notify_all()
            self.cond.wait_for(lambda: self.current == w)


class TracedArray:
    """Scalar-indexed view that logs every access to the runtime's current phase."""

    __slots__ = ("name", "arr", "rt")

    def __init__(self, name: str, arr: np.ndarray, rt: "InterleavedRuntime"):
        self.name, self.arr, self.rt = name, arr, rt

    def __len__(self) -> int:
        return len(self.arr)

    def __getitem__(self, i):
        self.rt._access(self, int(i), None)
        return int(self.arr[i])

    def __setitem__(self, i, value):
        self.rt._access(self, int(i), int(value))
        self.arr[i] = value


class InterleavedRuntime:
    """Drop-in for the native runtime; accumulates ``races`` across every phase it runs."""

    def __init__(self, seed: int = 0, preempt: float = 0.3):
        self.rng = random.Random(seed)
        self.sched = _Scheduler(self.rng, preempt)
        self.tls = threading.local()
        self.races: list[Race] = []
        self.phases = 0
        self._cells: dict = {}
        self._arrays: dict = {}
        self._phase_name = "?"

    @property
    def switches(self) -> int:
        return self.sched.switches

    def _access(self, ta: TracedArray, i: int, value) -> None:
        w = getattr(self.tls, "worker", 0)
        self.sched.point(w)
        cell = self._cells.get((ta.name, i))
        if cell is None:
            cell = self._cells[(ta.name, i)] = _Cell()
            self._arrays[ta.name] = ta.arr
        if value is None:
            cell.readers.add(w)
        else:
            cell.writers.add(w)
            cell.values.append(value)

    def run_tree(self, k: int, leaf) -> int:
        self.phases += 1
        self._cells = {}
        self._arrays = {}
        self._phase_name = "?"
        if k == 1:
            self.tls.worker = 0
            leaf(0)
        else:
            self.sched.run(k, leaf, self.tls)
        self._close_phase()
        return math.ceil(math.log2(k)) if k > 1 else 0

    def _close_phase(self) -> None:
        for (name, i), cell in self._cells.items():
            touched = cell.writers | cell.readers
            if not cell.writers or len(touched) < 2:
                continue
            self.races.append(Race(
                self._phase_name, name, i, tuple(sorted(touched)),
                tuple(sorted(set(cell.values))), int(self._arrays[name][i]),
            ))

    def kernel(self, fn):
        py = fn.py_func
        params = list(inspect.signature(py).parameters)
        phase = _PHASE_NAMES.get(py.__name__, py.__name__)

        def traced(*args):
            self._phase_name = phase
            wrapped = [
                TracedArray(name, a, self) if isinstance(a, np.ndarray) else a
                for name, a in zip(params, args)
            ]
            return py(*wrapped)

        return traced


def summarize(races: list[Race]) -> dict:
    """Racing locations grouped as ``{(phase, array): count}``."""
    out: dict = defaultdict(int)
    for r in races:
        out[(r.phase, r.array)] += 1
    return dict(out)
