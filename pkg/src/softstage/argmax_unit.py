"""Argmax-only output stage: a comparator tree instead of a softmax datapath.

Because the exponential is strictly increasing, the class with the largest
logit is the class the softmax would pick, so a classifier that only needs
the decision can drop the exponentials, adders and dividers entirely and
keep ``k - 1`` comparators.  This module models that unit two ways - an
explicit tournament tree and a linear scan - so each can serve as the
other's oracle, and counts structural costs for every variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2
from typing import Sequence

import numpy as np

from .fixedpoint import Fixed, QFormat

__all__ = [
    "ComparatorTreeConfig",
    "Prediction",
    "CostRecord",
    "argmax_comparator",
    "argmax_linear",
    "argmax_tree_raw",
    "cost_summary",
    "cost_of_unit",
    "VARIANT_NAMES",
]

VARIANT_NAMES = ("exact", "stable", "base2", "inverse", "cordic-exp", "reduced")


@dataclass(frozen=True)
class ComparatorTreeConfig:
    """Class count, datapath word, and the (fixed) lowest-index tie rule."""

    k: int
    word_format: QFormat
    tie_break: str = "lowest-index"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.tie_break != "lowest-index":
            raise ValueError("only lowest-index tie-breaking is modeled")

    @property
    def comparator_count(self) -> int:
        return self.k - 1

    @property
    def depth(self) -> int:
        return ceil(log2(self.k)) if self.k > 1 else 0


@dataclass(frozen=True)
class Prediction:
    """Winning class index (lowest index on ties) and its word value."""

    class_index: int
    winner_value: Fixed


def _check_inputs(x: Sequence[Fixed], word_format: QFormat) -> None:
    for xi in x:
        if xi.fmt != word_format:
            raise ValueError(f"input format {xi.fmt} != unit word format {word_format}")


def argmax_comparator(x: Sequence[Fixed], cfg: ComparatorTreeConfig) -> Prediction:
    """Evaluate the left-balanced tournament tree explicitly.

    Entries are paired in index order level by level; an unpaired entry is
    promoted unchanged.  Each comparator keeps the left operand on ties,
    which makes the overall winner the lowest index attaining the maximum.
    """
    if len(x) != cfg.k:
        raise ValueError(f"expected {cfg.k} inputs, got {len(x)}")
    if cfg.k < 1:
        raise ValueError("empty input")
    _check_inputs(x, cfg.word_format)

    level: list[tuple[int, Fixed]] = list(enumerate(x))
    while len(level) > 1:
        nxt: list[tuple[int, Fixed]] = []
        for pos in range(0, len(level) - 1, 2):
            left, right = level[pos], level[pos + 1]
            nxt.append(right if right[1].raw > left[1].raw else left)
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    index, value = level[0]
    return Prediction(index, value)


def argmax_linear(x: Sequence[Fixed]) -> Prediction:
    """Single left-to-right scan; independent oracle for the tree."""
    if len(x) < 1:
        raise ValueError("empty input")
    best_i, best = 0, x[0]
    for i, xi in enumerate(x[1:], start=1):
        if xi.fmt != best.fmt:
            raise ValueError(f"mixed formats {xi.fmt} vs {best.fmt}")
        if xi.raw > best.raw:
            best_i, best = i, xi
    return Prediction(best_i, best)


def argmax_tree_raw(raws: np.ndarray) -> np.ndarray:
    """Batched tournament on a (n, k) raw matrix; same wiring and tie rule.

    Used where a Python-object tree per vector would be too slow (exhaustive
    equivalence sweeps, large agreement runs); cross-checked against
    :func:`argmax_comparator` in the test suite.
    """
    if raws.ndim != 2 or raws.shape[1] < 1:
        raise ValueError("need a (n, k) matrix with k >= 1")
    values = raws
    indices = np.broadcast_to(np.arange(raws.shape[1]), raws.shape).copy()
    while values.shape[1] > 1:
        even = values.shape[1] - (values.shape[1] % 2)
        left_v, right_v = values[:, 0:even:2], values[:, 1:even:2]
        left_i, right_i = indices[:, 0:even:2], indices[:, 1:even:2]
        take_right = right_v > left_v
        win_v = np.where(take_right, right_v, left_v)
        win_i = np.where(take_right, right_i, left_i)
        if values.shape[1] % 2:
            win_v = np.concatenate([win_v, values[:, -1:]], axis=1)
            win_i = np.concatenate([win_i, indices[:, -1:]], axis=1)
        values, indices = win_v, win_i
    return indices[:, 0]


@dataclass(frozen=True)
class CostRecord:
    """Structural unit counts: hardware-block tallies, not gate equivalents."""

    comparators: int
    lut_bits: int
    adders: int
    multipliers: int
    dividers: int
    exp_evaluations: int

    def as_dict(self) -> dict[str, int]:
        return {
            "comparators": self.comparators,
            "lut_bits": self.lut_bits,
            "adders": self.adders,
            "multipliers": self.multipliers,
            "dividers": self.dividers,
            "exp_evaluations": self.exp_evaluations,
        }


def cost_summary(cfg: ComparatorTreeConfig) -> CostRecord:
    """The argmax-only unit: k - 1 comparators and nothing else."""
    return CostRecord(cfg.comparator_count, 0, 0, 0, 0, 0)


def cost_of_unit(
    variant: str,
    k: int,
    *,
    addr_bits: int = 8,
    value_width: int = 16,
    iterations: int = 16,
) -> CostRecord:
    """Structural cost of one output-stage variant for ``k`` classes.

    ``exact``/``stable`` count a full exponential per class, the denominator
    accumulation, one divider per class and the final maximum pick.
    ``base2`` swaps the exponentials for one shift+LUT (sized
    ``2**addr_bits * value_width`` bits).  ``inverse`` trades the dividers
    for an exponential of every pairwise difference.  ``cordic-exp`` is a
    single exponential evaluator (three add/sub stages per iteration plus
    its arctanh table), not a classifier.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if variant in ("exact", "stable"):
        return CostRecord(k - 1, 0, k - 1, 0, k, k)
    if variant == "base2":
        return CostRecord(k - 1, (1 << addr_bits) * value_width, k - 1, 0, k, 0)
    if variant == "inverse":
        return CostRecord(k - 1, 0, k * (k - 1), 0, 0, k * (k - 1))
    if variant == "cordic-exp":
        return CostRecord(0, iterations * value_width, 3 * iterations, 0, 0, 0)
    if variant == "reduced":
        return CostRecord(k - 1, 0, 0, 0, 0, 0)
    raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANT_NAMES}")
