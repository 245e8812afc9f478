"""Low-width quantized weight matrices and their integer SpMV."""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from neuro_qp.exceptions import DimensionMismatchError, QuantizationError
from neuro_qp.fxp.formats import FxpFormat, FxpTensor, OpCounter, saturate, shift_round
from neuro_qp.models.sparse import SparseMatrix

ACCUMULATOR_BITS = 63


@dataclass(frozen=True, eq=False)
class QuantizedMatrix:
    """Integer sparse matrix with a global power-of-two scale: value = raw * 2**scale_exp."""

    n_rows: int
    n_cols: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    raw: np.ndarray = field(repr=False)
    weight_bits: int = 8
    scale_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'rows', np.asarray(self.rows, dtype=np.int64))
        object.__setattr__(self, 'cols', np.asarray(self.cols, dtype=np.int64))
        object.__setattr__(self, 'raw', np.asarray(self.raw, dtype=np.int64))

    @property
    def nnz(self) -> int:
        return int(self.raw.size)

    @property
    def min_raw(self) -> int:
        return -(1 << (self.weight_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.weight_bits - 1)) - 1

    @cached_property
    def _csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.raw, (self.rows, self.cols)), shape=(self.n_rows, self.n_cols),
                                 dtype=np.int64)

    @cached_property
    def _pattern(self) -> sparse.csr_matrix:
        ones = np.ones(self.nnz, dtype=np.int64)
        return sparse.csr_matrix((ones, (self.rows, self.cols)), shape=(self.n_rows, self.n_cols))

    def row_nnz(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n_rows).astype(np.int64)

    def col_nnz(self) -> np.ndarray:
        """Fan-out of each input (column): synapses leaving that pre-synaptic neuron."""
        return np.bincount(self.cols, minlength=self.n_cols).astype(np.int64)

    def active_fan_in(self, emitted: np.ndarray) -> np.ndarray:
        """Per-row count of synapses fed by emitting inputs (MACs each row performs)."""
        if self.nnz == 0:
            return np.zeros(self.n_rows, dtype=np.int64)
        return self._pattern @ emitted.astype(np.int64)

    def dequantize(self) -> SparseMatrix:
        return SparseMatrix(self.n_rows, self.n_cols, self.rows, self.cols,
                            np.ldexp(self.raw.astype(np.float64), self.scale_exp))


def choose_scale_exp(max_abs: float, weight_bits: int) -> int:
    """Smallest integer e with max_abs / 2**e <= 2**(weight_bits-1) - 1."""
    limit = (1 << (weight_bits - 1)) - 1
    e = math.ceil(math.log2(max_abs / limit))
    while max_abs / 2.0 ** e > limit:
        e += 1
    while max_abs / 2.0 ** (e - 1) <= limit:
        e -= 1
    return e


def quantize_matrix(m: SparseMatrix, weight_bits: int = 8,
                    exp_range: Optional[Tuple[int, int]] = None) -> QuantizedMatrix:
    """Quantize to weight_bits signed integers under one power-of-two scale.

    ``exp_range`` bounds the scale exponent (a limited shift range); entries
    that round to zero are dropped, so the pattern is a subset of m's.
    """
    if not 2 <= weight_bits <= 16:
        raise ValueError(f"weight_bits must be in [2, 16], got {weight_bits}")
    max_abs = m.abs_max()
    if max_abs == 0.0:
        empty = np.zeros(0, dtype=np.int64)
        return QuantizedMatrix(m.n_rows, m.n_cols, empty, empty, empty, weight_bits, 0)
    if not math.isfinite(max_abs):
        raise QuantizationError("Cannot quantize a matrix with non-finite entries")
    scale_exp = choose_scale_exp(max_abs, weight_bits)
    if exp_range is not None:
        scale_exp = min(max(scale_exp, exp_range[0]), exp_range[1])
    limit = (1 << (weight_bits - 1)) - 1
    raw = np.clip(np.rint(np.ldexp(m.vals, -scale_exp)), -limit - 1, limit).astype(np.int64)
    keep = raw != 0
    return QuantizedMatrix(m.n_rows, m.n_cols, m.rows[keep], m.cols[keep], raw[keep], weight_bits, scale_exp)


def accumulator_bits(m: QuantizedMatrix, x_fmt: FxpFormat) -> int:
    """Integer width needed to accumulate one row without intermediate saturation."""
    max_row = int(m.row_nnz().max()) if m.nnz else 1
    return m.weight_bits + x_fmt.total_bits + max(math.ceil(math.log2(max(max_row, 1))), 0)


def fxp_spmv(m: QuantizedMatrix, x: FxpTensor, out_fmt: FxpFormat,
             counter: Optional[OpCounter] = None) -> FxpTensor:
    """Integer SpMV with exact wide accumulation and a single final rounding into out_fmt.

    Only nonzero inputs are propagated; the MACs executed (synapses leaving
    nonzero inputs) are added to ``counter``.
    """
    if len(x) != m.n_cols:
        raise DimensionMismatchError('fxp_spmv input', m.n_cols, len(x))
    if accumulator_bits(m, x.fmt) > ACCUMULATOR_BITS:
        raise QuantizationError(
            f"Accumulator needs {accumulator_bits(m, x.fmt)} bits (> {ACCUMULATOR_BITS}); "
            f"narrow the state or weight format"
        )
    emitted = x.raw != 0
    if counter is not None:
        counter.macs += int(m.col_nnz()[emitted].sum())
    if m.nnz == 0 or not emitted.any():
        return FxpTensor(np.zeros(m.n_rows, dtype=np.int64), out_fmt)
    acc = m._csr @ x.raw
    shift = x.fmt.frac_bits - out_fmt.frac_bits - m.scale_exp
    if shift < 0:
        bound = 1 << max(ACCUMULATOR_BITS - 1 + shift, 0)
        acc = np.clip(acc, -bound, bound)
    raw, count = saturate(shift_round(acc, shift), out_fmt, counter)
    return FxpTensor(raw, out_fmt, saturations=count)
