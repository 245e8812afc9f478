"""Seeded block-sparse MPC problem generator.

The decision vector interleaves states and controls stage by stage:
z = (x_0, u_0, x_1, u_1, ..., x_{N-1}, u_{N-1}, x_N). The cost is
block-diagonal in z; the equality constraints pin x_0 to x_init and chain
x_{j+1} = E_j x_j + F_j u_j + c_j, so A only couples adjacent stages.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List

import numpy as np
from scipy import sparse

from neuro_qp.models.problem import QpProblem, Sense
from neuro_qp.models.sparse import SparseMatrix
from neuro_qp.models.stage import StageModel, stage_offset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorSpec:
    """Everything needed to regenerate a StageModel bit for bit."""

    horizon: int = 5
    n_states: int = 24
    n_controls: int = 24
    seed: int = 0
    delta: float = 0.05
    eps: float = 1e-3
    rank_factor: int = 2

    def __post_init__(self):
        for name in ('horizon', 'n_states', 'n_controls', 'rank_factor'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GeneratorSpec':
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"Unknown generator fields: {', '.join(sorted(unknown))}")
        return cls(**data)


def _psd_block(rng: np.random.Generator, n: int, rank_factor: int, eps: float) -> np.ndarray:
    B = rng.standard_normal((n, rank_factor * n)) / np.sqrt(rank_factor * n)
    H = B @ B.T + eps * np.eye(n)
    return 0.5 * (H + H.T)


def generate_random(spec: GeneratorSpec) -> StageModel:
    """Draw a StageModel from ``spec``; identical specs give identical models."""
    rng = np.random.default_rng(spec.seed)
    ns, nc = spec.n_states, spec.n_controls
    blocks: Dict[str, List[np.ndarray]] = {name: [] for name in ('S', 'K', 'T', 'q', 'r', 'E', 'F', 'c')}
    for _ in range(spec.horizon):
        H = _psd_block(rng, ns + nc, spec.rank_factor, spec.eps)
        blocks['S'].append(H[:ns, :ns].copy())
        blocks['K'].append(H[ns:, :ns].copy())
        blocks['T'].append(H[ns:, ns:].copy())
        blocks['q'].append(rng.standard_normal(ns))
        blocks['r'].append(rng.standard_normal(nc))
        blocks['E'].append(np.eye(ns) + spec.delta * rng.standard_normal((ns, ns)) / np.sqrt(ns))
        blocks['F'].append(spec.delta * rng.standard_normal((ns, nc)) / np.sqrt(nc))
        blocks['c'].append(spec.delta * rng.standard_normal(ns))
    S_terminal = _psd_block(rng, ns, spec.rank_factor, spec.eps)
    q_terminal = rng.standard_normal(ns)
    x_init = rng.standard_normal(ns)
    return StageModel(
        n_states=ns,
        n_controls=nc,
        horizon=spec.horizon,
        S_terminal=S_terminal,
        q_terminal=q_terminal,
        x_init=x_init,
        metadata={'generator': spec.to_dict()},
        **blocks,
    )


class _Triplets:
    def __init__(self):
        self.rows: List[np.ndarray] = []
        self.cols: List[np.ndarray] = []
        self.vals: List[np.ndarray] = []

    def place(self, block: np.ndarray, row: int, col: int) -> None:
        r, c = np.nonzero(block)
        self.rows.append(r + row)
        self.cols.append(c + col)
        self.vals.append(block[r, c])

    def build(self, n_rows: int, n_cols: int) -> SparseMatrix:
        if not self.rows:
            return SparseMatrix.zeros(n_rows, n_cols)
        return SparseMatrix.from_triplets(n_rows, n_cols, np.concatenate(self.rows),
                                          np.concatenate(self.cols), np.concatenate(self.vals))


def tile(model: StageModel) -> QpProblem:
    """Assemble the block-sparse QP of an MPC horizon."""
    ns, N = model.n_states, model.horizon
    blocks = [sparse.csr_matrix(model.stage_hessian(j)) for j in range(N)]
    blocks.append(sparse.csr_matrix(model.S_terminal))
    Q = SparseMatrix.from_scipy(sparse.block_diag(blocks, format='csr'))

    p_parts: List[np.ndarray] = []
    for j in range(N):
        p_parts.extend([model.q[j], model.r[j]])
    p_parts.append(model.q_terminal)

    A = _Triplets()
    A.place(np.eye(ns), 0, 0)
    minus_identity = -np.eye(ns)
    for j in range(N):
        row = (j + 1) * ns
        col = stage_offset(model, j)
        A.place(model.E[j], row, col)
        A.place(model.F[j], row, col + ns)
        A.place(minus_identity, row, stage_offset(model, j + 1))
    k = np.concatenate([model.x_init] + [-c for c in model.c])

    problem = QpProblem(
        Q=Q,
        p=np.concatenate(p_parts),
        A=A.build(model.n_cons, model.n_vars),
        k=k,
        senses=(Sense.EQ,) * model.n_cons,
    )
    logger.debug("tiled horizon %d: L=%d, M=%d, nnz(Q)=%d, nnz(A)=%d",
                 N, problem.n_vars, problem.n_cons, problem.Q.nnz, problem.A.nnz)
    return problem


def _repair_psd(H: np.ndarray, eps: float) -> np.ndarray:
    H = 0.5 * (H + H.T)
    eig, vecs = np.linalg.eigh(H)
    if eig[0] >= eps:
        return H
    repaired = (vecs * np.maximum(eig, eps)) @ vecs.T
    return 0.5 * (repaired + repaired.T)


def perturb(model: StageModel, magnitude: float, seed: int) -> StageModel:
    """Relative multiplicative noise on every nonzero of the cost and dynamics blocks.

    Cost blocks are re-symmetrized and, when needed, projected back onto the
    PSD cone (eigenvalues clipped at the generator's eps).
    """
    if magnitude < 0:
        raise ValueError(f"magnitude must be >= 0, got {magnitude}")
    if magnitude == 0:
        return model
    rng = np.random.default_rng(seed)
    eps = model.metadata.get('generator', {}).get('eps', 1e-3)
    ns = model.n_states

    def jitter(block: np.ndarray) -> np.ndarray:
        return block * (1.0 + magnitude * rng.standard_normal(block.shape))

    S, K, T, E, F = [], [], [], [], []
    for j in range(model.horizon):
        H = _repair_psd(jitter(model.stage_hessian(j)), eps)
        S.append(H[:ns, :ns].copy())
        K.append(H[ns:, :ns].copy())
        T.append(H[ns:, ns:].copy())
        E.append(jitter(model.E[j]))
        F.append(jitter(model.F[j]))
    S_terminal = _repair_psd(jitter(model.S_terminal), eps)
    metadata = dict(model.metadata)
    metadata['perturbations'] = list(metadata.get('perturbations', [])) + [{'magnitude': magnitude, 'seed': seed}]
    return model.replace(S=S, K=K, T=T, E=E, F=F, S_terminal=S_terminal, metadata=metadata)


def perturbation_chain(model: StageModel, magnitude: float, length: int, seed: int) -> List[StageModel]:
    """``length`` models, each a perturbation of the previous one (the first is ``model``)."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    chain = [model]
    for i in range(1, length):
        chain.append(perturb(chain[-1], magnitude, seed + i))
    return chain
