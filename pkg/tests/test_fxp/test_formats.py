import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuro_qp.exceptions import QuantizationError
from neuro_qp.fxp.formats import (
    FxpFormat,
    FxpTensor,
    OpCounter,
    as_format,
    dequantize,
    quantize_vector,
    relu_raw,
    sat_add,
    sat_mul,
    sat_sub,
    shift_double,
    shift_halve,
    shift_round,
)


def test_parse_format():
    """Q<int>.<frac> counts an implicit sign bit."""
    fmt = FxpFormat.parse("Q17.6")
    assert fmt == FxpFormat(24, 6)
    assert str(fmt) == "Q17.6"
    assert FxpFormat.parse("Q7.16") == FxpFormat(24, 16)
    assert as_format("Q13.18").total_bits == 32


@pytest.mark.parametrize("text", ["17.6", "Q17", "q17.6", "Q40.0"])
def test_parse_rejects_bad_formats(text):
    with pytest.raises(ValueError):
        FxpFormat.parse(text)


def test_format_bounds():
    fmt = FxpFormat(8, 7)
    assert (fmt.min_raw, fmt.max_raw) == (-128, 127)
    assert fmt.resolution == 2 ** -7
    assert fmt.max_value == 127 / 128


def test_quantize_exact_value():
    t = quantize_vector([0.5], FxpFormat(8, 7))
    assert t.raw.tolist() == [64]
    assert t.saturations == 0


def test_quantize_saturates():
    counter = OpCounter()
    t = quantize_vector([1.0, -1.5], FxpFormat(8, 7), counter)
    assert t.raw.tolist() == [127, -128]
    assert counter.saturations == 2


def test_quantize_rounds_half_to_even():
    """Ties go to the even raw value."""
    t = quantize_vector([0.5, 1.5, 2.5, -0.5], FxpFormat(8, 0))
    assert t.raw.tolist() == [0, 2, 2, 0]


def test_quantize_rejects_nan():
    with pytest.raises(QuantizationError):
        quantize_vector([np.nan], "Q17.6")


def test_shift_round_half_to_even():
    assert shift_round([2, 6, 3, -2, -6], 2).tolist() == [0, 2, 1, 0, -2]
    assert shift_round([3], 0).tolist() == [3]
    assert shift_round([3], -2).tolist() == [12]


def test_sat_add_clamps():
    fmt = FxpFormat(8, 0)
    counter = OpCounter()
    out = sat_add(FxpTensor([100, -100], fmt), FxpTensor([100, -100], fmt), counter)
    assert out.raw.tolist() == [127, -128]
    assert out.saturations == 2
    assert counter.saturations == 2


def test_sat_sub_requires_same_format():
    with pytest.raises(ValueError):
        sat_sub(FxpTensor([1], FxpFormat(8, 0)), FxpTensor([1], FxpFormat(8, 1)))


def test_sat_mul_by_scalar():
    """Products are rounded once back into the tensor's format."""
    state = quantize_vector([1.0, -3.0], "Q17.6")
    alpha = quantize_vector([0.25], "Q7.16")
    assert dequantize(sat_mul(state, alpha)).tolist() == [0.25, -0.75]


def test_relu_respects_mask():
    t = FxpTensor([-3, 4, -5], FxpFormat(8, 0))
    assert relu_raw(t).raw.tolist() == [0, 4, 0]
    assert relu_raw(t, np.array([True, True, False])).raw.tolist() == [0, 4, -5]


def test_shift_halve_and_double():
    """Halving is a rounding right shift; doubling saturates."""
    fmt = FxpFormat(8, 0)
    assert shift_halve(FxpTensor([5, -5, 1], fmt)).raw.tolist() == [2, -3, 0]
    doubled = shift_double(FxpTensor([3, 100], fmt))
    assert doubled.raw.tolist() == [6, 127]
    assert doubled.saturations == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1000, 1000, allow_nan=False), min_size=1, max_size=20))
def test_quantization_error_bounded_by_half_resolution(values):
    fmt = FxpFormat.parse("Q17.6")
    t = quantize_vector(values, fmt)
    assert np.all(np.abs(dequantize(t) - np.asarray(values)) <= fmt.resolution / 2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-(1 << 40), 1 << 40), min_size=1, max_size=20), st.integers(1, 20))
def test_shift_round_is_nearest(values, shift):
    """Shift rounding never lands more than half a step from the exact quotient."""
    out = shift_round(values, shift)
    exact = np.asarray(values, dtype=object)
    for o, v in zip(out.tolist(), exact.tolist()):
        assert abs(o * (1 << shift) - v) * 2 <= (1 << shift)


byte = FxpFormat(8, 0)
byte_raw = st.integers(byte.min_raw, byte.max_raw)


@settings(max_examples=200, deadline=None)
@given(byte_raw, byte_raw, byte_raw)
def test_saturating_ops_are_monotone(a, b, c):
    """If a <= b then sat(a + c) <= sat(b + c), and likewise for sub and for a non-negative scale."""
    low, high = min(a, b), max(a, b)
    lo_t, hi_t, c_t = FxpTensor([low], byte), FxpTensor([high], byte), FxpTensor([c], byte)
    assert sat_add(lo_t, c_t).raw[0] <= sat_add(hi_t, c_t).raw[0]
    assert sat_sub(lo_t, c_t).raw[0] <= sat_sub(hi_t, c_t).raw[0]
    scale = FxpTensor([min(abs(c), 127)], FxpFormat(8, 4))
    assert sat_mul(lo_t, scale).raw[0] <= sat_mul(hi_t, scale).raw[0]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e7, 1e7, allow_nan=False), min_size=1, max_size=20),
       st.sampled_from(["Q17.6", "Q7.16", "Q13.18", "Q3.4"]))
def test_quantization_is_idempotent(values, fmt):
    """quantize(dequantize(quantize(x))) == quantize(x), saturated values included."""
    once = quantize_vector(values, fmt)
    twice = quantize_vector(dequantize(once), fmt)
    assert np.array_equal(once.raw, twice.raw)
    assert np.array_equal(quantize_vector(values, fmt).raw, once.raw)
