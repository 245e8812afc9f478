"""neuro-qp - event-based fixed-point QP solving, MPC problem generation and benchmarking."""

__version__ = '0.2.0'

from neuro_qp.models.problem import QpProblem, Solution, validate
from neuro_qp.models.sparse import SparseMatrix
from neuro_qp.solvers.network import Network, NetworkConfig, build_network
from neuro_qp.solvers.reference import HyperParams, solve_pipg

__all__ = [
    'QpProblem', 'Solution', 'validate', 'SparseMatrix', 'Network', 'NetworkConfig', 'build_network',
    'HyperParams', 'solve_pipg',
]
