"""Exponential evaluators: reference, base-2 shift+LUT, and hyperbolic CORDIC.

``exp_reference`` is the binary64 oracle.  The two hardware-style units
decompose ``x * log2(e)`` into an integer shift count and a fraction; the
fraction goes either through a ``2**v`` lookup table (``exp_base2``) or,
after rescaling to ``ln 2`` units, through a shift-add CORDIC rotation
(``exp_cordic``).  Tables are immutable after construction and every
evaluator is pure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO

from .fixedpoint import Fixed, QFormat, from_real, fx_add, fx_shift, fx_sub, to_real

__all__ = [
    "LOG2E_FRAC_BITS",
    "LOG2E_RAW",
    "Base2Decomposition",
    "ExpLut",
    "CordicConfig",
    "exp_reference",
    "exp_base2_decompose",
    "build_lut",
    "exp_base2",
    "exp_cordic",
    "cordic_schedule",
    "dump_lut_csv",
    "load_lut_csv",
]

# log2(e) rounded to the nearest multiple of 2**-62.  Fixing the constant as
# an integer keeps the integer/fraction split bit-reproducible regardless of
# the host libm; 62 fractional bits leave the split error below 2**-62 * |y|,
# invisible next to any downstream quantization.
LOG2E_FRAC_BITS = 62
LOG2E_RAW = 0x5C551D94AE0BF85E  # round(log2(e) * 2**62)

_LN2 = math.log(2.0)

# Hyperbolic CORDIC only converges if these rotation indices run twice
# (next would be 121, beyond any width this model allows).
CORDIC_REPEAT_INDICES = (4, 13, 40)


def exp_reference(x: float) -> float:
    """Binary64 ``e**x``; saturates to ``inf`` when the result is not finite."""
    if math.isnan(x):
        raise ValueError("exp_reference needs a finite input")
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Base2Decomposition:
    """``y * log2(e)`` split as integer ``shift_u`` plus ``frac_v`` in [0, 1)."""

    shift_u: int
    frac_v: float


def _split_scaled(num: int, den: int) -> tuple[int, int]:
    """Floor-split ``num/den`` into integer part and non-negative remainder."""
    u = num // den
    return u, num - u * den


def exp_base2_decompose(y: float) -> Base2Decomposition:
    """Exact floor decomposition ``y*log2(e) = u + v`` with ``0 <= v < 1``.

    Computed in rational arithmetic against the fixed ``LOG2E_RAW`` constant
    so the split never depends on libm rounding.
    """
    if not math.isfinite(y):
        raise ValueError("decompose needs a finite input")
    t = Fraction(y) * Fraction(LOG2E_RAW, 1 << LOG2E_FRAC_BITS)
    u, rem = _split_scaled(t.numerator, t.denominator)
    v = float(Fraction(rem, t.denominator))
    if v == 1.0:  # exact fraction just below 1 can round up in binary64
        return Base2Decomposition(u + 1, 0.0)
    return Base2Decomposition(u, v)


@dataclass(frozen=True)
class ExpLut:
    """Lookup table for ``2**(a / 2**addr_bits)``, entries in [1, 2)."""

    addr_bits: int
    value_format: QFormat
    entries: tuple[Fixed, ...]

    @property
    def size(self) -> int:
        return 1 << self.addr_bits

    @property
    def storage_bits(self) -> int:
        return self.size * self.value_format.width

    def __getitem__(self, address: int) -> Fixed:
        return self.entries[address]


def build_lut(addr_bits: int, value_format: QFormat) -> ExpLut:
    """Tabulate ``2**(a/2**addr_bits)`` with nearest-even entry rounding."""
    if addr_bits < 1:
        raise ValueError("addr_bits must be >= 1")
    n = 1 << addr_bits
    top = 2.0 ** ((n - 1) / n)
    if from_real(1.0, value_format).value != 1.0 or from_real(top, value_format).value >= 2.0:
        raise ValueError(f"{value_format} cannot represent the [1, 2) entry range")
    entries = tuple(from_real(2.0 ** (a / n), value_format) for a in range(n))
    return ExpLut(addr_bits, value_format, entries)


def _decompose_fixed(x: Fixed) -> tuple[int, int, int]:
    """Floor-split ``to_real(x) * log2(e)``; returns (u, remainder, denominator)."""
    num = x.raw * LOG2E_RAW
    den = 1 << (x.fmt.frac_bits + LOG2E_FRAC_BITS)
    u, rem = _split_scaled(num, den)
    return u, rem, den


def exp_base2(y: Fixed, lut: ExpLut) -> Fixed:
    """``e**y`` as ``fx_shift(lut[trunc(v)], u)`` in the LUT value format.

    The fractional index is truncated (floor), matching an address-indexed
    table; the one-sided loss stays below ``ln(2)/2**addr_bits``.
    """
    u, rem, den = _decompose_fixed(y)
    address = (rem << lut.addr_bits) // den
    return fx_shift(lut[address], u)


def cordic_schedule(iterations: int) -> tuple[int, ...]:
    """First ``iterations`` hyperbolic rotation indices (1,2,3,4,4,5,...)."""
    out: list[int] = []
    i = 1
    while len(out) < iterations:
        out.append(i)
        if i in CORDIC_REPEAT_INDICES and len(out) < iterations:
            out.append(i)
        i += 1
    return tuple(out)


def _cordic_gain_inverse(iterations: int) -> float:
    g = 1.0
    for i in cordic_schedule(iterations):
        g *= math.sqrt(1.0 - 2.0 ** (-2 * i))
    return 1.0 / g


@dataclass(frozen=True)
class CordicConfig:
    """Iteration count, datapath word, and precomputed rotation gain inverse."""

    iterations: int
    word_format: QFormat
    gain_inverse: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.iterations < 4:
            raise ValueError("hyperbolic CORDIC needs at least 4 iterations")
        if self.gain_inverse == 0.0:
            object.__setattr__(self, "gain_inverse", _cordic_gain_inverse(self.iterations))


def exp_cordic(x: Fixed, cfg: CordicConfig) -> Fixed:
    """``e**x`` via base-2 pre-scaling and a hyperbolic CORDIC rotation.

    ``x*log2(e)`` is split against the nearest integer, so the rotation
    argument ``r = v*ln(2)`` satisfies ``|r| <= ln(2)/2``, comfortably inside
    the hyperbolic convergence interval (~1.1182).  The rotation accumulates
    ``cosh r`` and ``sinh r`` whose sum is ``e**r``; the integer part is then
    applied with a single saturating shift.  Rotations whose arctanh table
    entry underflows the word resolution are skipped: they would perturb the
    state without ever updating the residual angle.
    """
    if x.fmt != cfg.word_format:
        raise ValueError(f"input format {x.fmt} != config word format {cfg.word_format}")
    fmt = cfg.word_format
    num = x.raw * LOG2E_RAW
    den = 1 << (fmt.frac_bits + LOG2E_FRAC_BITS)
    u = (2 * num + den) // (2 * den)  # nearest integer of x*log2(e)
    r = float(Fraction(num - u * den, den)) * _LN2

    cx = from_real(cfg.gain_inverse, fmt)
    cy = Fixed(0, fmt)
    cz = from_real(r, fmt)
    for i in cordic_schedule(cfg.iterations):
        step = from_real(math.atanh(2.0**-i), fmt)
        if step.raw == 0:
            break
        dx = fx_shift(cy, -i)
        dy = fx_shift(cx, -i)
        if cz.raw >= 0:
            cx, cy, cz = fx_add(cx, dx), fx_add(cy, dy), fx_sub(cz, step)
        else:
            cx, cy, cz = fx_sub(cx, dx), fx_sub(cy, dy), fx_add(cz, step)
    return fx_shift(fx_add(cx, cy), u)


def dump_lut_csv(lut: ExpLut, stream: IO[str]) -> None:
    """Write ``address,raw,real`` rows for inspection and golden-file tests."""
    writer = csv.writer(stream)
    writer.writerow(["address", "raw", "real"])
    for a, entry in enumerate(lut.entries):
        writer.writerow([a, entry.raw, repr(to_real(entry))])


def load_lut_csv(stream: IO[str], addr_bits: int, value_format: QFormat) -> ExpLut:
    """Rebuild a table from :func:`dump_lut_csv` output, validating each row."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != ["address", "raw", "real"]:
        raise ValueError(f"unexpected LUT CSV header: {header}")
    entries: list[Fixed] = []
    for row in reader:
        address, raw, real = int(row[0]), int(row[1]), float(row[2])
        if address != len(entries):
            raise ValueError(f"LUT CSV addresses out of order at {address}")
        entry = Fixed(raw, value_format)
        if to_real(entry) != real:
            raise ValueError(f"raw/real mismatch at address {address}")
        entries.append(entry)
    if len(entries) != 1 << addr_bits:
        raise ValueError(f"expected {1 << addr_bits} entries, got {len(entries)}")
    return ExpLut(addr_bits, value_format, tuple(entries))
