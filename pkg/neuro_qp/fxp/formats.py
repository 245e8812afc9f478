"""Fixed-point formats, tensors and saturating arithmetic.

Values are stored as signed integers ``raw`` with an implicit binary point:
``value = raw * 2**-frac_bits``. Every write saturates to the format's range;
rounding is half-to-even throughout.
"""

import re
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple, Union

import numpy as np

from neuro_qp.exceptions import QuantizationError

_FORMAT_RE = re.compile(r'^Q(\d+)\.(\d+)$')


@dataclass(frozen=True)
class FxpFormat:
    """Signed fixed-point layout ("Q<int>.<frac>", the sign bit is implicit)."""

    total_bits: int = 24
    frac_bits: int = 6

    def __post_init__(self):
        if not 2 <= self.total_bits <= 32:
            raise ValueError(f"total_bits must be in [2, 32], got {self.total_bits}")
        if not 0 <= self.frac_bits < self.total_bits:
            raise ValueError(f"frac_bits must be in [0, {self.total_bits}), got {self.frac_bits}")

    @classmethod
    def parse(cls, text: str) -> 'FxpFormat':
        match = _FORMAT_RE.match(text.strip())
        if not match:
            raise ValueError(f"Invalid fixed-point format '{text}' (expected e.g. 'Q17.6')")
        int_bits, frac_bits = int(match.group(1)), int(match.group(2))
        return cls(total_bits=1 + int_bits + frac_bits, frac_bits=frac_bits)

    def __str__(self) -> str:
        return f"Q{self.total_bits - 1 - self.frac_bits}.{self.frac_bits}"

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def max_value(self) -> float:
        return self.max_raw * self.resolution


FormatLike = Union[FxpFormat, str]


def as_format(fmt: FormatLike) -> FxpFormat:
    return FxpFormat.parse(fmt) if isinstance(fmt, str) else fmt


@dataclass
class OpCounter:
    """Running totals of arithmetic events across fixed-point calls."""

    macs: int = 0
    saturations: int = 0

    def reset(self) -> None:
        self.macs = 0
        self.saturations = 0


@dataclass(frozen=True, eq=False)
class FxpTensor:
    """Vector of raw integers sharing one FxpFormat."""

    raw: np.ndarray
    fmt: FxpFormat
    saturations: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'raw', np.asarray(self.raw, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.raw.size)

    def dequantize(self) -> np.ndarray:
        return dequantize(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FxpTensor):
            return NotImplemented
        return self.fmt == other.fmt and np.array_equal(self.raw, other.raw)

    __hash__ = None


def saturate(raw: Any, fmt: FxpFormat, counter: Optional[OpCounter] = None) -> Tuple[np.ndarray, int]:
    """Clamp raw integers into the format's range; returns (clamped, number clamped)."""
    raw = np.asarray(raw, dtype=np.int64)
    clipped = np.clip(raw, fmt.min_raw, fmt.max_raw)
    count = int(np.count_nonzero(clipped != raw))
    if counter is not None:
        counter.saturations += count
    return clipped, count


def shift_round(acc: Any, shift: int) -> np.ndarray:
    """Compute acc * 2**-shift with round-half-to-even (exact left shift when shift <= 0)."""
    acc = np.asarray(acc, dtype=np.int64)
    if shift <= 0:
        return acc << -shift
    floor = acc >> shift
    remainder = acc - (floor << shift)
    half = 1 << (shift - 1)
    round_up = (remainder > half) | ((remainder == half) & (floor & 1 == 1))
    return floor + round_up.astype(np.int64)


def quantize_vector(x: Any, fmt: FormatLike, counter: Optional[OpCounter] = None) -> FxpTensor:
    """Round x to the nearest representable value (half-to-even) and saturate."""
    fmt = as_format(fmt)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.any(np.isnan(x)):
        raise QuantizationError("Cannot quantize NaN values")
    scaled = np.rint(np.ldexp(x, fmt.frac_bits))
    clipped = np.clip(scaled, fmt.min_raw, fmt.max_raw)
    count = int(np.count_nonzero(clipped != scaled))
    if counter is not None:
        counter.saturations += count
    return FxpTensor(clipped.astype(np.int64), fmt, saturations=count)


def dequantize(t: FxpTensor) -> np.ndarray:
    return np.ldexp(t.raw.astype(np.float64), -t.fmt.frac_bits)


def _same_format(a: FxpTensor, b: FxpTensor) -> None:
    if a.fmt != b.fmt:
        raise ValueError(f"Format mismatch: {a.fmt} vs {b.fmt}")


def sat_add(a: FxpTensor, b: FxpTensor, counter: Optional[OpCounter] = None) -> FxpTensor:
    _same_format(a, b)
    raw, count = saturate(a.raw + b.raw, a.fmt, counter)
    return FxpTensor(raw, a.fmt, saturations=count)


def sat_sub(a: FxpTensor, b: FxpTensor, counter: Optional[OpCounter] = None) -> FxpTensor:
    _same_format(a, b)
    raw, count = saturate(a.raw - b.raw, a.fmt, counter)
    return FxpTensor(raw, a.fmt, saturations=count)


def sat_mul(a: FxpTensor, b: FxpTensor, counter: Optional[OpCounter] = None) -> FxpTensor:
    """Elementwise product in a's format; b may be a length-1 scalar tensor."""
    raw, count = saturate(shift_round(a.raw * b.raw, b.fmt.frac_bits), a.fmt, counter)
    return FxpTensor(raw, a.fmt, saturations=count)


def scale_by(scalar: FxpTensor, t: FxpTensor, counter: Optional[OpCounter] = None) -> FxpTensor:
    """Multiply t by a fixed-point scalar (e.g. a step size) with a single final rounding."""
    return sat_mul(t, scalar, counter)


def relu_raw(t: FxpTensor, mask: Optional[np.ndarray] = None) -> FxpTensor:
    """max(raw, 0) on entries selected by mask (all entries when mask is None)."""
    raw = np.maximum(t.raw, 0) if mask is None else np.where(mask, np.maximum(t.raw, 0), t.raw)
    return FxpTensor(raw, t.fmt)


def shift_halve(t: FxpTensor) -> FxpTensor:
    """Arithmetic right shift by one (floor toward negative infinity)."""
    return FxpTensor(t.raw >> 1, t.fmt)


def shift_double(t: FxpTensor, counter: Optional[OpCounter] = None) -> FxpTensor:
    """Left shift by one with saturation."""
    raw, count = saturate(t.raw << 1, t.fmt, counter)
    return FxpTensor(raw, t.fmt, saturations=count)
