"""Per-level, per-step trace records filled in while a traversal runs."""

from __future__ import annotations

from dataclasses import dataclass, field

STEP_NAMES = ("gather", "scan", "start_points", "explore", "dedup", "size_scan", "linearize")


@dataclass
class StepStats:
    step_name: str
    work_items: int
    workers_used: int
    wall_time: float
    high_water: int = 0
    depth: int = 0

    @property
    def core_time(self) -> float:
        return self.workers_used * self.wall_time


@dataclass
class LevelStats:
    level: int
    n_l: int
    e_l: int = 0
    arcs_scanned: int = 0
    discovered: int = 0
    kept: int = 0
    steps: list[StepStats] = field(default_factory=list)

    @property
    def w_l(self) -> int:
        return sum(s.work_items for s in self.steps)

    @property
    def wall_time(self) -> float:
        return sum(s.wall_time for s in self.steps)

    @property
    def core_time(self) -> float:
        return sum(s.core_time for s in self.steps)

    @property
    def max_step_work(self) -> int:
        return max((s.work_items for s in self.steps), default=0)

    def step(self, name: str) -> StepStats:
        for s in self.steps:
            if s.step_name == name:
                return s
        raise KeyError(name)


@dataclass
class RunTrace:
    run_id: int
    source: int
    variant: str
    max_workers: int
    levels: list[LevelStats] = field(default_factory=list)
    init_time: float = 0.0
    total_time: float = 0.0
    start_stamp: float = 0.0
    end_stamp: float = 0.0


class StatsRecorder:
    """Collects ``LevelStats`` for one traversal; steps go into the open level."""

    def __init__(self):
        self.levels: list[LevelStats] = []
        self._open: LevelStats | None = None

    def open_level(self, level: int, n_l: int) -> LevelStats:
        if self._open is not None:
            raise RuntimeError(f"level {self._open.level} is still open")
        self._open = LevelStats(level, n_l)
        return self._open

    def record_step(self, step_name: str, work_items: int, workers_used: int,
                    wall_time: float, high_water: int = 0, depth: int = 0) -> StepStats:
        if self._open is None:
            raise RuntimeError("record_step called with no open level")
        if step_name not in STEP_NAMES:
            raise ValueError(f"unknown step {step_name!r}")
        if workers_used < 0 or wall_time < 0:
            raise ValueError("workers_used and wall_time must be non-negative")
        row = StepStats(step_name, work_items, workers_used, wall_time, high_water, depth)
        self._open.steps.append(row)
        return row

    def close_level(self, e_l: int) -> LevelStats:
        if self._open is None:
            raise RuntimeError("no open level")
        lvl, self._open = self._open, None
        lvl.e_l = e_l
        self.levels.append(lvl)
        return lvl
