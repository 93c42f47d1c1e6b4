"""Counter-based deterministic random numbers (SplitMix64).

Experiments must be replayable bit-for-bit from ``(seed, index)`` alone, on
any platform and in any evaluation order, so the generator is the classic
SplitMix64 finalizer applied to ``seed + (index + 1) * GAMMA``.  Draw ``i``
of a stream depends only on the seed and ``i``; trials can therefore be
evaluated concurrently or vectorized without changing the output.

Constants (Steele, Lea & Flood's SplitMix64):
    GAMMA = 0x9E3779B97F4A7C15   (2**64 / golden ratio, odd)
    MIX1  = 0xBF58476D1CE4E5B9
    MIX2  = 0x94D049BB133111EB

A double in [0, 1) is formed from the top 53 bits: ``(z >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GAMMA", "MIX1", "MIX2", "mix64", "uniform01_at", "uniform_matrix"]

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_INV_2_53 = 2.0**-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * MIX1) & _MASK
    z = ((z ^ (z >> 27)) * MIX2) & _MASK
    return z ^ (z >> 31)


def uniform01_at(seed: int, index: int) -> float:
    """Draw ``index`` of the stream for ``seed``, uniform in [0, 1)."""
    z = mix64((seed + (index + 1) * GAMMA) & _MASK)
    return (z >> 11) * _INV_2_53


def uniform_matrix(
    seed: int,
    rows: int,
    cols: int,
    lo: float,
    hi: float,
    start_index: int = 0,
) -> np.ndarray:
    """Uniform [lo, hi) matrix; entry (r, c) is stream draw ``start_index + r*cols + c``.

    Vectorized but bit-identical to repeated :func:`uniform01_at` calls
    (uint64 arithmetic wraps identically in numpy and in the scalar path).
    """
    n = rows * cols
    idx = np.arange(start_index + 1, start_index + n + 1, dtype=np.uint64)
    z = (np.uint64(seed & _MASK) + idx * np.uint64(GAMMA)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    z = z ^ (z >> np.uint64(31))
    u = (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
    out = lo + (hi - lo) * u
    # float rounding may land exactly on hi; keep the half-open contract
    np.minimum(out, np.nextafter(hi, lo), out=out)
    return out.reshape(rows, cols)
