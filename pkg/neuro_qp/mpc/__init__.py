"""Block-sparse MPC problems: generation, tiling and resource accounting."""

from neuro_qp.mpc.generator import GeneratorSpec, generate_random, perturb, perturbation_chain, tile
from neuro_qp.mpc.resources import (
    LADDER_HORIZONS,
    ChipFootprint,
    Resources,
    chip_footprint,
    count_resources,
    size_ladder,
)

__all__ = [
    'GeneratorSpec', 'generate_random', 'perturb', 'perturbation_chain', 'tile', 'LADDER_HORIZONS',
    'ChipFootprint', 'Resources', 'chip_footprint', 'count_resources', 'size_ladder',
]
