"""Shared problem builders for the test suite."""

from typing import Optional, Sequence

import numpy as np
import pytest

from neuro_qp.models.problem import Box, QpProblem, Sense
from neuro_qp.models.sparse import SparseMatrix


def dense_problem(Q, p, A=None, k=None, senses: Sequence[str] = (), box: Optional[Box] = None) -> QpProblem:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    L = Q.shape[1]
    A = np.zeros((0, L)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    k = np.zeros(0) if k is None else np.asarray(k, dtype=float)
    return QpProblem(SparseMatrix.from_dense(Q), np.asarray(p, dtype=float), SparseMatrix.from_dense(A), k,
                     tuple(Sense(s) for s in senses), box)


def known_optimum_problem(seed: int, L: int = 12, M: int = 6, n_active: int = 3):
    """Random strictly convex QP with inequality rows and a known KKT point.

    Picks x*, an active set with positive multipliers and slack on the other
    rows, then sets p = -(Q x* + A' v*) and k tight on active rows.
    """
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((L, 2 * L)) / np.sqrt(2 * L)
    Q = B @ B.T + 0.5 * np.eye(L)
    Q = 0.5 * (Q + Q.T)
    A = rng.standard_normal((M, L)) / np.sqrt(L)
    x_star = rng.standard_normal(L)
    v_star = np.zeros(M)
    v_star[:n_active] = rng.uniform(0.5, 1.5, n_active)
    slack = np.zeros(M)
    slack[n_active:] = rng.uniform(0.5, 1.5, M - n_active)
    k = A @ x_star + slack
    p = -(Q @ x_star + A.T @ v_star)
    return dense_problem(Q, p, A, k), x_star, v_star


@pytest.fixture
def two_var_problem():
    """Q = 2I, p = 0, x1 <= 1."""
    return dense_problem([[2, 0], [0, 2]], [0, 0], [[1, 0]], [1])


@pytest.fixture
def halfspace_problem():
    """Q = I, p = 0 with x1 >= 1 written as -x1 <= -1; optimum [1, 0]."""
    return dense_problem(np.eye(2), [0, 0], [[-1, 0]], [-1])


@pytest.fixture
def equality_problem():
    """Q = I, p = 0 with x1 + x2 = 2; optimum [1, 1]."""
    return dense_problem(np.eye(2), [0, 0], [[1, 1]], [2], senses=['eq'])
