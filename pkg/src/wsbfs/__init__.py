"""Work-sensitive lock-free level-synchronous parallel BFS with instrumentation."""

from .graph import (
    UNREACHED,
    CsrGraph,
    GraphFormatError,
    build_csr,
    generate_erdos_renyi,
    generate_rmat,
    load_edge_list,
    load_matrix_market,
    serial_bfs,
)
from .instrumentation import BoundReport, compare_variants, evaluate_bound, ratio_table
from .primitives import (
    WorkerBudget,
    choose_workers,
    parallel_for,
    parallel_for_chunks,
    parallel_prefix_sum,
)
from .s3bfs import RunConfig, run_bfs
from .stats import LevelStats, StatsRecorder, StepStats

__all__ = [
    "UNREACHED", "CsrGraph", "GraphFormatError", "build_csr", "generate_erdos_renyi",
    "generate_rmat", "load_edge_list", "load_matrix_market", "serial_bfs", "BoundReport",
    "compare_variants", "evaluate_bound", "ratio_table", "WorkerBudget", "choose_workers",
    "parallel_for", "parallel_for_chunks", "parallel_prefix_sum", "RunConfig", "run_bfs",
    "LevelStats", "StatsRecorder", "StepStats",
]
