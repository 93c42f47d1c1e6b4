"""Deterministic signed/unsigned fixed-point arithmetic (Q format).

Models an accelerator datapath word: every operation saturates instead of
wrapping, multiplication and right shifts round to nearest-even, and all
raw values are plain Python integers so results are bit-identical across
platforms.  ``QFormat`` and ``Fixed`` are frozen values; everything here is
pure and safe to share between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "QFormat",
    "Fixed",
    "FormatMismatchError",
    "from_real",
    "to_real",
    "fx_add",
    "fx_sub",
    "fx_neg",
    "fx_mul",
    "fx_shift",
    "fx_cmp",
    "quantize_vector",
    "real_vector",
]

_QFORMAT_RE = re.compile(r"^([su])Q(\d+)\.(\d+)$")


class FormatMismatchError(ValueError):
    """Raised when a binary operation mixes operands of different formats."""


@dataclass(frozen=True)
class QFormat:
    """Fixed-point word layout: ``int_bits`` + ``frac_bits`` (+ sign bit).

    Resolution is exactly ``2**-frac_bits``.  Total width is capped at 64
    bits so double-wide intermediate products still fit native integers in
    compiled implementations of the same model.
    """

    int_bits: int
    frac_bits: int
    signed: bool = True

    def __post_init__(self) -> None:
        if self.int_bits < 0 or self.frac_bits < 0:
            raise ValueError(f"negative field width in {self!r}")
        if self.width > 64:
            raise ValueError(f"{self}: total width {self.width} exceeds 64 bits")

    @property
    def width(self) -> int:
        return self.int_bits + self.frac_bits + (1 if self.signed else 0)

    @property
    def max_raw(self) -> int:
        return (1 << (self.int_bits + self.frac_bits)) - 1

    @property
    def min_raw(self) -> int:
        return -(1 << (self.int_bits + self.frac_bits)) if self.signed else 0

    @property
    def ulp(self) -> float:
        return math.ldexp(1.0, -self.frac_bits)

    @property
    def max_value(self) -> float:
        return math.ldexp(self.max_raw, -self.frac_bits)

    @property
    def min_value(self) -> float:
        return math.ldexp(self.min_raw, -self.frac_bits)

    @classmethod
    def from_string(cls, text: str) -> "QFormat":
        """Parse the config spelling ``sQ<int>.<frac>`` / ``uQ<int>.<frac>``."""
        m = _QFORMAT_RE.match(text.strip())
        if not m:
            raise ValueError(f"bad QFormat string {text!r}, expected e.g. 'sQ7.8'")
        return cls(int(m.group(2)), int(m.group(3)), signed=(m.group(1) == "s"))

    def __str__(self) -> str:
        return f"{'s' if self.signed else 'u'}Q{self.int_bits}.{self.frac_bits}"


@dataclass(frozen=True)
class Fixed:
    """A raw integer interpreted under a :class:`QFormat`.

    The raw value is always inside ``[min_raw, max_raw]``; constructors and
    every arithmetic helper enforce that by saturation.
    """

    raw: int
    fmt: QFormat

    def __post_init__(self) -> None:
        if not self.fmt.min_raw <= self.raw <= self.fmt.max_raw:
            raise ValueError(f"raw {self.raw} outside {self.fmt} range")

    @property
    def value(self) -> float:
        return math.ldexp(self.raw, -self.fmt.frac_bits)

    def _check(self, other: "Fixed") -> None:
        if self.fmt != other.fmt:
            raise FormatMismatchError(f"{self.fmt} vs {other.fmt}")

    def __lt__(self, other: "Fixed") -> bool:
        self._check(other)
        return self.raw < other.raw

    def __le__(self, other: "Fixed") -> bool:
        self._check(other)
        return self.raw <= other.raw

    def __repr__(self) -> str:
        return f"Fixed({self.value}, {self.fmt})"


def _saturate(raw: int, fmt: QFormat) -> int:
    if raw > fmt.max_raw:
        return fmt.max_raw
    if raw < fmt.min_raw:
        return fmt.min_raw
    return raw


def _rshift_rne(x: int, n: int) -> int:
    """Arithmetic shift right by ``n`` with round-to-nearest-even (n >= 0)."""
    if n == 0:
        return x
    half = 1 << (n - 1)
    q = x >> n
    r = x - (q << n)
    if r > half or (r == half and (q & 1)):
        q += 1
    return q


def from_real(v: float, fmt: QFormat) -> Fixed:
    """Quantize ``v`` with round-to-nearest-even, saturating out-of-range input.

    ``ldexp`` by the fraction width is exact for binary64 inputs, so the
    subsequent ``round`` performs true nearest-even on the scaled value.
    """
    if math.isnan(v):
        raise ValueError("cannot quantize NaN")
    scaled = math.ldexp(v, fmt.frac_bits)
    if math.isinf(scaled):
        return Fixed(fmt.max_raw if scaled > 0 else fmt.min_raw, fmt)
    return Fixed(_saturate(round(scaled), fmt), fmt)


def to_real(x: Fixed) -> float:
    """Exact real value ``raw * 2**-frac_bits``."""
    return x.value


def fx_add(a: Fixed, b: Fixed) -> Fixed:
    a._check(b)
    return Fixed(_saturate(a.raw + b.raw, a.fmt), a.fmt)


def fx_sub(a: Fixed, b: Fixed) -> Fixed:
    a._check(b)
    return Fixed(_saturate(a.raw - b.raw, a.fmt), a.fmt)


def fx_neg(a: Fixed) -> Fixed:
    return Fixed(_saturate(-a.raw, a.fmt), a.fmt)


def fx_mul(a: Fixed, b: Fixed) -> Fixed:
    """Saturating multiply; the double-wide product is rounded nearest-even."""
    a._check(b)
    prod = a.raw * b.raw
    return Fixed(_saturate(_rshift_rne(prod, a.fmt.frac_bits), a.fmt), a.fmt)


def fx_shift(a: Fixed, n: int) -> Fixed:
    """Multiply by ``2**n`` (left shift for n > 0), saturating.

    Right shifts round to nearest-even like every other narrowing step.
    """
    if n >= 0:
        return Fixed(_saturate(a.raw << n, a.fmt), a.fmt)
    return Fixed(_saturate(_rshift_rne(a.raw, -n), a.fmt), a.fmt)


def fx_cmp(a: Fixed, b: Fixed) -> int:
    """Three-way compare: -1, 0 or 1 as a <, ==, > b."""
    a._check(b)
    return (a.raw > b.raw) - (a.raw < b.raw)


def quantize_vector(values: Sequence[float] | np.ndarray, fmt: QFormat) -> np.ndarray:
    """Vectorized ``from_real`` returning raw int64 values.

    Bit-identical to the scalar path: scaling by a power of two is exact on
    binary64 and ``np.rint`` rounds half to even.  Formats wider than the
    binary64 mantissa fall back to the scalar path so the saturation bounds
    stay exact.
    """
    v = np.asarray(values, dtype=np.float64)
    if np.isnan(v).any():
        raise ValueError("cannot quantize NaN")
    if fmt.int_bits + fmt.frac_bits > 52:
        flat = [from_real(float(x), fmt).raw for x in v.reshape(-1)]
        return np.array(flat, dtype=np.int64).reshape(v.shape)
    scaled = np.ldexp(v, fmt.frac_bits)
    scaled = np.clip(scaled, float(fmt.min_raw), float(fmt.max_raw))
    return np.rint(scaled).astype(np.int64)


def real_vector(raws: np.ndarray, fmt: QFormat) -> np.ndarray:
    """Vectorized ``to_real`` for an array of raw values."""
    return np.ldexp(raws.astype(np.float64), -fmt.frac_bits)
