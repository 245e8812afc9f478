"""Neuron and synapse counts for tiled MPC problems, and how many cores they occupy."""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Sequence, Tuple

LADDER_HORIZONS = (5, 50, 75, 100, 150, 175)

KIB = 1024


class Resources(NamedTuple):
    n_neurons_decision: int
    n_neurons_total: int
    n_synapses: int


def count_resources(n_states: int, n_controls: int, horizon: int) -> Resources:
    """Neurons for the decision vector, all neurons (adding one per equality row) and the synapse bound.

    synapses = ns (2 ns + nc) N + (ns + nc)^2 N + ns^2
    """
    for name, value in (('n_states', n_states), ('n_controls', n_controls), ('horizon', horizon)):
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")
    ns, nc, N = n_states, n_controls, horizon
    decision = (N + 1) * ns + N * nc
    constraints = (N + 1) * ns
    synapses = ns * (2 * ns + nc) * N + (ns + nc) ** 2 * N + ns ** 2
    return Resources(decision, decision + constraints, synapses)


@dataclass(frozen=True)
class ChipFootprint:
    neuron_cores: int
    synapse_cores: int
    cores: int
    chips: int
    cores_per_chip: int

    @property
    def fits_single_chip(self) -> bool:
        return self.chips <= 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'neuron_cores': self.neuron_cores,
            'synapse_cores': self.synapse_cores,
            'cores': self.cores,
            'chips': self.chips,
            'fits_single_chip': self.fits_single_chip,
        }


def chip_footprint(resources: Resources, bytes_per_neuron: int = 2, bytes_per_weight: int = 1,
                   neuron_memory: int = 8 * KIB, synapse_memory: int = 64 * KIB,
                   cores_per_chip: int = 128) -> ChipFootprint:
    """Cores needed to hold the neuron state and the synaptic weights, whichever is larger."""
    neurons_per_core = neuron_memory // bytes_per_neuron
    synapses_per_core = synapse_memory // bytes_per_weight
    neuron_cores = math.ceil(resources.n_neurons_total / neurons_per_core)
    synapse_cores = math.ceil(resources.n_synapses / synapses_per_core)
    cores = max(neuron_cores, synapse_cores, 1)
    return ChipFootprint(neuron_cores, synapse_cores, cores, math.ceil(cores / cores_per_chip), cores_per_chip)


def size_ladder(horizons: Sequence[int] = LADDER_HORIZONS, n_states: int = 24,
                n_controls: int = 24) -> List[Tuple[int, Resources]]:
    return [(N, count_resources(n_states, n_controls, N)) for N in horizons]
