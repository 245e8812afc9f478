"""Fixed-point numerics emulating bounded-width neuromorphic hardware."""

from neuro_qp.fxp.formats import (
    FxpFormat,
    FxpTensor,
    OpCounter,
    dequantize,
    quantize_vector,
    relu_raw,
    sat_add,
    sat_mul,
    sat_sub,
    saturate,
    scale_by,
    shift_double,
    shift_halve,
    shift_round,
)
from neuro_qp.fxp.matrix import QuantizedMatrix, fxp_spmv, quantize_matrix

__all__ = [
    'FxpFormat', 'FxpTensor', 'OpCounter', 'dequantize', 'quantize_vector', 'relu_raw',
    'sat_add', 'sat_mul', 'sat_sub', 'saturate', 'scale_by', 'shift_double',
    'shift_halve', 'shift_round', 'QuantizedMatrix', 'fxp_spmv', 'quantize_matrix',
]
