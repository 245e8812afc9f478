"""Benchmark harness and specs."""

from neuro_qp.bench.harness import (
    CellResult,
    replay,
    run_bench,
    run_gap_study,
    run_scaling_study,
    run_warmstart_study,
    summarize,
    summarize_from_csv,
)
from neuro_qp.bench.spec import BenchSpec, ProblemSource, SolverSpec, WarmstartSpec, load_bench_spec

__all__ = [
    'CellResult', 'replay', 'run_bench', 'run_gap_study', 'run_scaling_study', 'run_warmstart_study',
    'summarize', 'summarize_from_csv', 'BenchSpec', 'ProblemSource', 'SolverSpec', 'WarmstartSpec',
    'load_bench_spec',
]
