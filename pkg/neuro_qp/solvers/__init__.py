"""Preconditioning, float reference solvers and the event-based network solver."""

from neuro_qp.solvers.network import (
    EventStats,
    IterationEvents,
    Network,
    NetworkConfig,
    build_network,
    solve,
    step,
    warm_start,
)
from neuro_qp.solvers.partition import PartitionReport, halving_sweep, partition
from neuro_qp.solvers.precond import Scaling, apply_scaling, ruiz_equilibrate, unscale_solution
from neuro_qp.solvers.reference import (
    HyperParams,
    estimate_hyperparams,
    relu_gate,
    solve_gd,
    solve_gdcc,
    solve_kkt,
    solve_pipg,
)

__all__ = [
    'EventStats', 'IterationEvents', 'Network', 'NetworkConfig', 'build_network', 'solve', 'step',
    'warm_start', 'PartitionReport', 'halving_sweep', 'partition', 'Scaling', 'apply_scaling',
    'ruiz_equilibrate', 'unscale_solution', 'HyperParams', 'estimate_hyperparams',
    'relu_gate', 'solve_gd', 'solve_gdcc', 'solve_kkt', 'solve_pipg',
]
