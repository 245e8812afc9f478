"""Analytic multi-core cost model for a network's recorded workload."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from neuro_qp.solvers.network import Network

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartitionReport:
    n_cores: int
    neurons_per_core: int
    iterations: int
    core_neurons: List[int] = field(repr=False)
    core_work: List[int] = field(repr=False)
    sync_overhead: float
    per_iteration_cost: float
    total_cost: float
    serial_cost: float

    @property
    def speedup(self) -> float:
        return self.serial_cost / self.total_cost if self.total_cost else 1.0

    @property
    def efficiency(self) -> float:
        return self.speedup / self.n_cores

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_cores': self.n_cores,
            'neurons_per_core': self.neurons_per_core,
            'iterations': self.iterations,
            'core_neurons': list(self.core_neurons),
            'core_work': list(self.core_work),
            'sync_overhead': self.sync_overhead,
            'per_iteration_cost': self.per_iteration_cost,
            'total_cost': self.total_cost,
            'serial_cost': self.serial_cost,
            'speedup': self.speedup,
            'efficiency': self.efficiency,
        }


def sync_overhead(n_cores: int, sync_cost: float) -> float:
    """Barrier cost per timestep: sync_cost * ceil(log2(n_cores)) work units."""
    return sync_cost * math.ceil(math.log2(n_cores)) if n_cores > 1 else 0.0


def partition(network: Network, neurons_per_core: Optional[int] = None,
              sync_cost: Optional[float] = None) -> PartitionReport:
    """Assign neurons to cores in index order and estimate the parallel cost.

    A core's work is its neurons' updates plus the MACs for synapses whose
    post-synaptic neuron lives on it; the slowest core plus the barrier sets
    the per-timestep cost.
    """
    neurons_per_core = network.cfg.neurons_per_core if neurons_per_core is None else neurons_per_core
    sync_cost = network.cfg.sync_cost if sync_cost is None else sync_cost
    if neurons_per_core < 1:
        raise ValueError(f"neurons_per_core must be >= 1, got {neurons_per_core}")

    work, iterations = network.workload()
    n = work.size
    if n == 0:
        return PartitionReport(1, neurons_per_core, iterations, [0], [0], 0.0, 0.0, 0.0, 0.0)
    starts = np.arange(0, n, neurons_per_core)
    core_work = np.add.reduceat(work, starts)
    core_neurons = np.diff(np.append(starts, n))
    n_cores = int(starts.size)

    overhead = sync_overhead(n_cores, sync_cost)
    per_iteration = float(core_work.max()) / iterations + overhead
    report = PartitionReport(
        n_cores=n_cores,
        neurons_per_core=neurons_per_core,
        iterations=iterations,
        core_neurons=core_neurons.tolist(),
        core_work=core_work.tolist(),
        sync_overhead=overhead,
        per_iteration_cost=per_iteration,
        total_cost=per_iteration * iterations,
        serial_cost=float(work.sum()),
    )
    logger.debug("partition: %d cores, cost %.1f, speedup %.2f", n_cores, report.total_cost, report.speedup)
    return report


def halving_sweep(network: Network, max_cores: int, sync_cost: Optional[float] = None) -> List[PartitionReport]:
    """Reports for neurons_per_core = n, n/2, n/4, ... until the core count reaches max_cores."""
    n = max(network.n_neurons, 1)
    reports = []
    cores = 1
    while cores <= max_cores:
        reports.append(partition(network, math.ceil(n / cores), sync_cost))
        cores *= 2
    return reports
