"""Ruiz equilibration of the stacked KKT pattern and exact unscaling."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy import sparse

from neuro_qp.exceptions import DimensionMismatchError
from neuro_qp.models.problem import Box, QpProblem

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 10
DEFAULT_TOL = 0.1


@dataclass(frozen=True, eq=False)
class Scaling:
    """Diagonal variable scaling d, constraint scaling e and cost scalar c."""

    d: np.ndarray
    e: np.ndarray
    c: float = 1.0
    iterations: int = 0
    max_iters_hit: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'd', np.asarray(self.d, dtype=np.float64))
        object.__setattr__(self, 'e', np.asarray(self.e, dtype=np.float64))
        for name, vec in (('d', self.d), ('e', self.e), ('c', np.array([self.c]))):
            if not np.all(np.isfinite(vec)) or np.any(vec <= 0):
                raise ValueError(f"Scaling entries of {name} must be positive and finite")

    @classmethod
    def identity(cls, n_vars: int, n_cons: int) -> 'Scaling':
        return cls(np.ones(n_vars), np.ones(n_cons))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'd': self.d.tolist(),
            'e': self.e.tolist(),
            'c': self.c,
            'iterations': self.iterations,
            'max_iters_hit': self.max_iters_hit,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Scaling':
        return cls(d=data['d'], e=data['e'], c=data.get('c', 1.0),
                   iterations=data.get('iterations', 0), max_iters_hit=data.get('max_iters_hit', False))


def _stacked(Q: sparse.spmatrix, A: sparse.spmatrix) -> sparse.csc_matrix:
    if A.shape[0] == 0:
        return sparse.csc_matrix(Q)
    return sparse.bmat([[Q, A.T], [A, None]], format='csc')


def _column_norms(K: sparse.spmatrix) -> np.ndarray:
    if K.nnz == 0:
        return np.zeros(K.shape[1])
    return np.asarray(abs(K).max(axis=0).todense()).ravel()


def stacked_norms(problem: QpProblem) -> np.ndarray:
    """Column infinity norms of [[Q, A'], [A, 0]] (length L + M)."""
    return _column_norms(_stacked(problem.Q.to_csr(), problem.A.to_csr()))


def _within(norms: np.ndarray, tol: float) -> bool:
    nonzero = norms[norms > 0]
    return bool(np.all(np.abs(nonzero - 1.0) <= tol))


def ruiz_equilibrate(problem: QpProblem, max_iters: int = DEFAULT_MAX_ITERS,
                     tol: float = DEFAULT_TOL) -> Tuple[QpProblem, Scaling]:
    """Symmetric Ruiz scaling of the KKT pattern followed by cost normalization."""
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not 0 < tol < 1:
        raise ValueError(f"tol must be in (0, 1), got {tol}")
    L, M = problem.n_vars, problem.n_cons
    K = _stacked(problem.Q.to_csr(), problem.A.to_csr())
    delta = np.ones(L + M)
    iterations = 0
    converged = False
    while True:
        norms = _column_norms(K)
        if _within(norms, tol):
            converged = True
            break
        if iterations >= max_iters:
            break
        step = np.ones_like(norms)
        nonzero = norms > 0
        step[nonzero] = 1.0 / np.sqrt(norms[nonzero])
        S = sparse.diags(step)
        K = (S @ K @ S).tocsc()
        delta *= step
        iterations += 1

    d, e = delta[:L], delta[L:]
    Qd = problem.Q.scaled(d, d)
    q_norm = float(_column_norms(Qd.to_csr()).mean()) if L else 0.0
    p_norm = float(np.abs(d * problem.p).max()) if L else 0.0
    cost_norm = max(q_norm, p_norm)
    c = 1.0 / cost_norm if cost_norm > 0 else 1.0

    scaling = Scaling(d=d, e=e, c=c, iterations=iterations, max_iters_hit=not converged)
    if not converged:
        logger.warning("Ruiz equilibration hit max_iters=%d before reaching tol=%g", max_iters, tol)
    logger.info("Ruiz equilibration: %d iterations, c=%.4g", iterations, c)
    return apply_scaling(problem, scaling), scaling


def apply_scaling(problem: QpProblem, scaling: Scaling) -> QpProblem:
    """Q' = c DQD, p' = c Dp, A' = EAD, k' = Ek, box' = box / d."""
    d, e, c = scaling.d, scaling.e, scaling.c
    box = None
    if problem.box is not None:
        box = Box(problem.box.lower / d, problem.box.upper / d)
    return QpProblem(
        Q=problem.Q.scaled(d, d, factor=c),
        p=c * d * problem.p,
        A=problem.A.scaled(e, d),
        k=e * problem.k,
        senses=problem.senses,
        box=box,
    )


def _check(what: str, vec: Any, expected: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (expected,):
        raise DimensionMismatchError(what, expected, vec.size)
    return vec


def unscale_solution(x_scaled: Any, scaling: Scaling) -> np.ndarray:
    """Map a minimizer of the scaled problem back to the original variables (D x')."""
    return scaling.d * _check('x_scaled', x_scaled, scaling.d.size)


def scale_primal(x: Any, scaling: Scaling) -> np.ndarray:
    return _check('x', x, scaling.d.size) / scaling.d


def scale_dual(v: Any, scaling: Scaling) -> np.ndarray:
    return scaling.c * _check('v', v, scaling.e.size) / scaling.e


def unscale_dual(v_scaled: Any, scaling: Scaling) -> np.ndarray:
    return scaling.e * _check('v_scaled', v_scaled, scaling.e.size) / scaling.c

