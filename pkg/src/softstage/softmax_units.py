"""Softmax output-stage variants and the cross-entropy reference metric.

Four ways to turn a logit vector into a class decision:

* ``softmax_exact``  - textbook normalized exponentials, no rescaling; the
  reference (and the variant that can overflow).
* ``softmax_stable`` - max-subtraction first, every exponential <= 1.
* ``inverse_softmax`` - reciprocal scores ``1 + sum exp(x_i - x_j)``; the
  prediction is the argmin, and no division is ever needed.
* ``pseudo_softmax_base2`` - the fixed-point unit: base-2 exponentials via
  shift+LUT, saturating accumulation, double-wide division.

Real-domain variants run in binary64 end to end; only the pseudo unit
touches fixed point.  All functions are pure; the real-domain ones accept a
single vector or a batch (last axis = classes).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .exp_units import ExpLut, exp_base2
from .fixedpoint import Fixed, QFormat, _saturate, fx_add, fx_sub

__all__ = [
    "SoftmaxOverflowError",
    "softmax_exact",
    "softmax_stable",
    "inverse_softmax",
    "predict_inverse",
    "cross_entropy",
    "pseudo_softmax_base2",
]


class SoftmaxOverflowError(OverflowError):
    """The plain exponential left binary64 range; use the stable variant."""


def _as_logits(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0 or a.shape[-1] < 1:
        raise ValueError("logit vector must have k >= 1 entries")
    if not np.isfinite(a).all():
        raise ValueError("logits must be finite")
    return a


def softmax_exact(x) -> np.ndarray:
    """``exp(x_j) / sum_i exp(x_i)`` with no rescaling.

    Raises :class:`SoftmaxOverflowError` as soon as any exponential (or the
    accumulated denominator) is no longer finite.
    """
    a = _as_logits(x)
    with np.errstate(over="ignore"):
        e = np.exp(a)
    denom = e.sum(axis=-1, keepdims=True)
    if not (np.isfinite(e).all() and np.isfinite(denom).all()):
        raise SoftmaxOverflowError("exp overflow; evaluate with softmax_stable")
    return e / denom


def softmax_stable(x) -> np.ndarray:
    """Max-subtraction softmax: identical values, immune to overflow."""
    a = _as_logits(x)
    shifted = a - a.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def inverse_softmax(x) -> np.ndarray:
    """Reciprocal scores ``s'(x_j) = 1 + sum_{i != j} exp(x_i - x_j)``.

    Deliberately evaluated from the pairwise differences (not by inverting
    the softmax) so the reciprocal identity stays a meaningful cross-check.
    A difference large enough to overflow saturates that score to ``inf``,
    which is still usable for the argmin decision.
    """
    a = _as_logits(x)
    squeeze = a.ndim == 1
    if squeeze:
        a = a[None, :]
    diffs = a[:, :, None] - a[:, None, :]  # [batch, i, j] = x_i - x_j
    with np.errstate(over="ignore"):
        scores = np.exp(diffs).sum(axis=1)
    return scores[0] if squeeze else scores


def predict_inverse(scores) -> int:
    """Class index with the minimum reciprocal score; ties go to the lowest index."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.shape[0] < 1:
        raise ValueError("scores must be a non-empty vector")
    return int(np.argmin(s))


def cross_entropy(p, target: int) -> float:
    """One-hot cross entropy ``-ln p[target]``; a zero probability gives ``inf``."""
    probs = np.asarray(p, dtype=np.float64)
    if not 0 <= target < probs.shape[-1]:
        raise ValueError(f"target {target} outside [0, {probs.shape[-1]})")
    pt = float(probs[target])
    if pt < 0.0 or pt > 1.0 + 1e-12:
        raise ValueError(f"p[{target}] = {pt} is not a probability")
    return math.inf if pt == 0.0 else -math.log(pt)


def _accumulator_format(value_format: QFormat, k: int) -> QFormat:
    """Widen the integer field so k LUT outputs can accumulate, capped at 64 bits."""
    growth = max(1, (k - 1).bit_length()) if k > 1 else 0
    headroom = 64 - (1 if value_format.signed else 0) - value_format.frac_bits
    return QFormat(
        min(value_format.int_bits + growth, headroom),
        value_format.frac_bits,
        value_format.signed,
    )


def pseudo_softmax_base2(
    x: Sequence[Fixed], lut: ExpLut, out_format: QFormat
) -> list[Fixed]:
    """Fixed-point softmax: base-2 numerators, saturating sum, double-wide divide.

    The maximum logit is subtracted in the input word first, so the largest
    numerator is exactly the 1.0 table entry and the denominator can never
    be zero.  Each quotient is rounded to nearest-even in ``out_format``.
    """
    if len(x) < 1:
        raise ValueError("logit vector must have k >= 1 entries")
    word = x[0].fmt
    for xi in x:
        if xi.fmt != word:
            raise ValueError("logits must share one word format")

    m = max(x, key=lambda f: f.raw)
    numerators = [exp_base2(fx_sub(xi, m), lut) for xi in x]

    acc_format = _accumulator_format(lut.value_format, len(x))
    acc = Fixed(0, acc_format)
    for n in numerators:
        acc = fx_add(acc, Fixed(n.raw, acc_format))

    probs: list[Fixed] = []
    for n in numerators:
        q = _div_rne(n.raw << out_format.frac_bits, acc.raw)
        probs.append(Fixed(_saturate(q, out_format), out_format))
    return probs


def _div_rne(num: int, den: int) -> int:
    """Integer divide with round-to-nearest, ties to even (den > 0)."""
    q, r = divmod(num, den)
    twice = 2 * r
    if twice > den or (twice == den and (q & 1)):
        q += 1
    return q
