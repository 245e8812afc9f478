"""Immutable sparse matrix in canonical triplet form."""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy import sparse

from neuro_qp.exceptions import DimensionMismatchError


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Sparse real matrix stored as row-major sorted triplets.

    Instances built through ``from_triplets`` are canonical: duplicate
    (row, col) pairs are summed, explicit zeros are dropped and entries are
    ordered by row then column. Compressed-row access goes through ``to_csr``.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    vals: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'rows', np.asarray(self.rows, dtype=np.int64))
        object.__setattr__(self, 'cols', np.asarray(self.cols, dtype=np.int64))
        object.__setattr__(self, 'vals', np.asarray(self.vals, dtype=np.float64))
        for arr in (self.rows, self.cols, self.vals):
            arr.setflags(write=False)

    @classmethod
    def from_triplets(cls, n_rows: int, n_cols: int, rows: Sequence[int], cols: Sequence[int],
                      vals: Sequence[float], keep_zeros: bool = False) -> 'SparseMatrix':
        """Canonicalize (row, col, value) triplets into a SparseMatrix."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError(
                f"Triplet arrays differ in length: rows={len(rows)}, cols={len(cols)}, vals={len(vals)}"
            )
        if len(rows) and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
            raise ValueError(f"Triplet index out of range for a {n_rows}x{n_cols} matrix")
        csr = sparse.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
        csr.sum_duplicates()
        if not keep_zeros:
            csr.eliminate_zeros()
        return cls.from_scipy(csr)

    @classmethod
    def from_scipy(cls, m: Any) -> 'SparseMatrix':
        csr = sparse.csr_matrix(m, dtype=np.float64)
        csr.sum_duplicates()
        csr.sort_indices()
        coo = csr.tocoo()
        return cls(csr.shape[0], csr.shape[1], coo.row, coo.col, coo.data)

    @classmethod
    def from_dense(cls, dense: Any) -> 'SparseMatrix':
        dense = np.atleast_2d(np.asarray(dense, dtype=np.float64))
        rows, cols = np.nonzero(dense)
        return cls.from_triplets(dense.shape[0], dense.shape[1], rows, cols, dense[rows, cols])

    @classmethod
    def identity(cls, n: int) -> 'SparseMatrix':
        idx = np.arange(n)
        return cls(n, n, idx, idx, np.ones(n))

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> 'SparseMatrix':
        empty = np.zeros(0)
        return cls(n_rows, n_cols, empty, empty, empty)

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @cached_property
    def _csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.vals, (self.rows, self.cols)), shape=self.shape)

    def to_csr(self) -> sparse.csr_matrix:
        """Return a fresh scipy CSR copy (callers may mutate it)."""
        return self._csr.copy()

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def transpose(self) -> 'SparseMatrix':
        return SparseMatrix.from_scipy(self._csr.T)

    @property
    def T(self) -> 'SparseMatrix':
        return self.transpose()

    def row_nnz(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n_rows).astype(np.int64)

    def col_nnz(self) -> np.ndarray:
        return np.bincount(self.cols, minlength=self.n_cols).astype(np.int64)

    def scaled(self, row_scale: Optional[np.ndarray] = None, col_scale: Optional[np.ndarray] = None,
               factor: float = 1.0) -> 'SparseMatrix':
        """Return diag(row_scale) @ self @ diag(col_scale) * factor; the pattern is unchanged."""
        vals = self.vals * factor
        if row_scale is not None:
            vals = vals * np.asarray(row_scale, dtype=np.float64)[self.rows]
        if col_scale is not None:
            vals = vals * np.asarray(col_scale, dtype=np.float64)[self.cols]
        return SparseMatrix(self.n_rows, self.n_cols, self.rows, self.cols, vals)

    def abs_max(self) -> float:
        return float(np.abs(self.vals).max()) if self.nnz else 0.0

    def to_dict(self) -> Dict[str, list]:
        return {
            'rows': self.rows.tolist(),
            'cols': self.cols.tolist(),
            'vals': self.vals.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], n_rows: int, n_cols: int) -> 'SparseMatrix':
        """Build from the ``{"rows", "cols", "vals"}`` object used in problem files."""
        return cls.from_triplets(n_rows, n_cols, data['rows'], data['cols'], data['vals'])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.vals, other.vals))

    __hash__ = None


def spmv(m: SparseMatrix, x: Any) -> np.ndarray:
    """Exact sparse matrix-vector product ``m @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.n_cols,):
        raise DimensionMismatchError('spmv input', m.n_cols, x.shape[0] if x.ndim else 1)
    if m.nnz == 0:
        return np.zeros(m.n_rows)
    return m._csr @ x
