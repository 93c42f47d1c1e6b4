"""Experiment engine: input generation, agreement sweeps, golden-table checks.

Inputs are drawn with the counter-based generator in :mod:`softstage.rng`,
so a report is a pure function of ``(config, seed)`` and trials may be
evaluated in any order (each trial's substream is addressed by its index).
Agreement runs score every requested variant's class decision against a
chosen oracle variant; quantized variants are scored only on trials whose
top-two logit gap exceeds one input ulp, because below that a quantized
comparison is undecidable by construction.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from . import rng
from .argmax_unit import (
    ComparatorTreeConfig,
    argmax_comparator,
    argmax_linear,
    argmax_tree_raw,
    cost_of_unit,
)
from .exp_units import ExpLut, build_lut, exp_base2, exp_reference
from .fixedpoint import Fixed, QFormat, fx_sub, quantize_vector, real_vector
from .softmax_units import (
    inverse_softmax,
    pseudo_softmax_base2,
    softmax_exact,
    softmax_stable,
)

__all__ = [
    "InputSpec",
    "ExperimentReport",
    "InputFormatError",
    "AGREEMENT_VARIANTS",
    "DEFAULT_WORD_FORMAT",
    "DEFAULT_LUT_FORMAT",
    "DEFAULT_OUT_FORMAT",
    "DEFAULT_ADDR_BITS",
    "gen_uniform",
    "run_agreement",
    "reproduce_table1",
    "render_table1_text",
    "emit_monotonicity_data",
    "read_logits_csv",
    "write_logits_csv",
    "GOLDEN_COLUMNS",
    "Table1Result",
]

SCHEMA_VERSION = 1

AGREEMENT_VARIANTS = ("exact", "stable", "base2", "inverse", "reduced")

DEFAULT_WORD_FORMAT = QFormat.from_string("sQ7.8")
DEFAULT_LUT_FORMAT = QFormat.from_string("sQ2.14")
DEFAULT_OUT_FORMAT = QFormat.from_string("uQ0.16")
DEFAULT_ADDR_BITS = 8


class InputFormatError(ValueError):
    """Malformed logit CSV input; the message names the offending line."""


@dataclass(frozen=True)
class InputSpec:
    """One uniform sampling task: ``trials`` vectors of ``k`` values in [lo, hi)."""

    lo: float
    hi: float
    k: int
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi})")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def gen_uniform(spec: InputSpec) -> np.ndarray:
    """Deterministic (trials, k) matrix; row t uses stream indices t*k .. t*k+k-1."""
    return rng.uniform_matrix(spec.seed, spec.trials, spec.k, spec.lo, spec.hi)


# --------------------------------------------------------------------------
# agreement runs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated agreement/error statistics; serializes to canonical JSON."""

    seed: int
    config: dict
    ranges: list[dict] = field(default_factory=list)
    costs: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "config": self.config,
            "ranges": self.ranges,
            "costs": self.costs,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def variant_stats(self, variant: str, range_index: int = 0) -> dict:
        return self.ranges[range_index]["variants"][variant]


def _real_predictions(variant: str, mat: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """(predicted class, probability matrix or None) for a real-domain variant."""
    if variant == "exact":
        probs = softmax_exact(mat)
        return np.argmax(probs, axis=1), probs
    if variant == "stable":
        probs = softmax_stable(mat)
        return np.argmax(probs, axis=1), probs
    if variant == "inverse":
        preds = np.empty(mat.shape[0], dtype=np.int64)
        probs = np.empty_like(mat)
        chunk = max(1, 2_000_000 // (mat.shape[1] * mat.shape[1] + 1))
        for start in range(0, mat.shape[0], chunk):
            scores = inverse_softmax(mat[start : start + chunk])
            preds[start : start + chunk] = np.argmin(scores, axis=1)
            with np.errstate(divide="ignore"):
                probs[start : start + chunk] = 1.0 / scores
        return preds, probs
    raise ValueError(f"unknown real-domain variant {variant!r}")


def _quantized_predictions(
    variant: str,
    mat: np.ndarray,
    word_format: QFormat,
    lut: ExpLut,
    out_format: QFormat,
) -> tuple[np.ndarray, np.ndarray | None]:
    """(predicted class, probability matrix or None) for a fixed-point variant.

    The base-2 unit decides the class on its exponential outputs, before the
    divide: division only rescales, while rounding the quotients could merge
    two distinct numerators.
    """
    raws = quantize_vector(mat, word_format)
    if variant == "reduced":
        return argmax_tree_raw(raws), None
    if variant == "base2":
        preds = np.empty(mat.shape[0], dtype=np.int64)
        probs = np.empty_like(mat)
        for t in range(mat.shape[0]):
            row = [Fixed(int(r), word_format) for r in raws[t]]
            m = max(row, key=lambda fx: fx.raw)
            numerators = [exp_base2(fx_sub(xi, m), lut) for xi in row]
            preds[t] = argmax_linear(numerators).class_index
            quotients = pseudo_softmax_base2(row, lut, out_format)
            probs[t] = [q.value for q in quotients]
        return preds, probs
    raise ValueError(f"unknown quantized variant {variant!r}")


def run_agreement(
    spec: InputSpec,
    variants: Sequence[str],
    oracle: str,
    *,
    word_format: QFormat = DEFAULT_WORD_FORMAT,
    addr_bits: int = DEFAULT_ADDR_BITS,
    lut_format: QFormat = DEFAULT_LUT_FORMAT,
    out_format: QFormat = DEFAULT_OUT_FORMAT,
) -> ExperimentReport:
    """Score each variant's class decisions and probabilities against ``oracle``."""
    variants = list(dict.fromkeys(variants))  # dedupe, keep order
    for v in variants + [oracle]:
        if v not in AGREEMENT_VARIANTS:
            raise ValueError(f"unknown variant {v!r}; expected one of {AGREEMENT_VARIANTS}")
    if oracle not in variants:
        variants.append(oracle)

    mat = gen_uniform(spec)
    top_two = np.sort(mat, axis=1)[:, -2:] if spec.k > 1 else None
    gaps = (top_two[:, 1] - top_two[:, 0]) if spec.k > 1 else np.full(spec.trials, math.inf)
    tie_free = gaps > 0.0
    gap_ok = gaps > word_format.ulp

    lut = build_lut(addr_bits, lut_format)
    oracle_pred, oracle_probs = _predict(oracle, mat, word_format, lut, out_format)

    per_variant: dict[str, dict] = {}
    for variant in variants:
        pred, probs = _predict(variant, mat, word_format, lut, out_format)
        scored = gap_ok if variant in ("base2", "reduced") else tie_free
        n_scored = int(scored.sum())
        agreement = float(np.mean(pred[scored] == oracle_pred[scored])) if n_scored else 1.0
        stats = {
            "agreement": agreement,
            "trials_scored": n_scored,
            "max_abs_prob_error": None,
            "mean_abs_prob_error": None,
        }
        if probs is not None and oracle_probs is not None:
            err = np.abs(probs[scored] - oracle_probs[scored])
            if err.size:
                stats["max_abs_prob_error"] = float(err.max())
                stats["mean_abs_prob_error"] = float(err.mean())
        per_variant[variant] = stats

    config = {
        "lo": spec.lo,
        "hi": spec.hi,
        "k": spec.k,
        "trials": spec.trials,
        "oracle": oracle,
        "variants": variants,
        "word_format": str(word_format),
        "lut_addr_bits": addr_bits,
        "lut_format": str(lut_format),
        "out_format": str(out_format),
    }
    costs = {
        v: cost_of_unit(
            v, spec.k, addr_bits=addr_bits, value_width=lut_format.width
        ).as_dict()
        for v in variants
    }
    range_block = {"lo": spec.lo, "hi": spec.hi, "variants": per_variant}
    return ExperimentReport(seed=spec.seed, config=config, ranges=[range_block], costs=costs)


def _predict(
    variant: str,
    mat: np.ndarray,
    word_format: QFormat,
    lut: ExpLut,
    out_format: QFormat,
) -> tuple[np.ndarray, np.ndarray | None]:
    if variant in ("base2", "reduced"):
        return _quantized_predictions(variant, mat, word_format, lut, out_format)
    return _real_predictions(variant, mat)


# --------------------------------------------------------------------------
# golden table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldenColumn:
    """One published sample set: inputs plus printed e**x and softmax values."""

    label: str
    lo: float
    hi: float
    inputs: tuple[float, ...]
    exp_printed: tuple[float, ...]
    softmax_printed: tuple[float, ...]
    bold_index: int


# Transcribed verbatim from the published sample table.  The source prints
# everything at limited precision (inputs truncated to two decimals), which
# bounds how closely recomputation can agree; see tests/test_acceptance.py.
GOLDEN_COLUMNS: tuple[GoldenColumn, ...] = (
    GoldenColumn(
        label="all_negative",
        lo=-100.0,
        hi=0.0,
        inputs=(-67.98, -33.07, -76.26, -92.96, -90.64, -10.83, -16.15, -89.70, -36.38, -60.84),
        exp_printed=(2.98e-30, 4.33e-15, 7.54e-34, 4.22e-41, 4.30e-40, 1.96e-05, 9.67e-08, 1.09e-39, 1.57e-16, 3.75e-27),
        softmax_printed=(1.51e-25, 2.19e-10, 3.81e-29, 2.13e-36, 2.17e-35, 9.95e-01, 4.89e-03, 5.55e-35, 7.97e-12, 1.89e-22),
        bold_index=5,
    ),
    GoldenColumn(
        label="all_positive",
        lo=0.0,
        hi=100.0,
        inputs=(62.31, 87.20, 10.66, 83.53, 45.06, 73.87, 49.77, 66.38, 23.36, 95.52),
        exp_printed=(1.16e27, 7.44e37, 4.27e04, 1.90e36, 3.74e19, 1.20e32, 4.14e21, 6.89e28, 1.40e10, 3.05e41),
        softmax_printed=(3.80e-15, 2.44e-04, 1.41e-37, 6.24e-06, 1.22e-22, 3.95e-10, 1.35e-20, 2.22e-13, 4.61e-32, 9.97e-01),
        bold_index=9,
    ),
    GoldenColumn(
        label="random",
        lo=-1.0,
        hi=1.0,
        inputs=(-0.95, -0.83, -0.69, 0.58, -0.55, 0.16, 0.23, 0.91, 0.07, 0.18),
        exp_printed=(0.38, 0.43, 0.49, 1.79, 0.57, 1.18, 1.26, 2.49, 1.07, 1.20),
        softmax_printed=(0.03, 0.03, 0.04, 0.16, 0.05, 0.10, 0.11, 0.22, 0.09, 0.11),
        bold_index=7,
    ),
)


@dataclass(frozen=True)
class Table1Row:
    set_label: str
    x: float
    exp_computed: float
    exp_printed: float
    exp_rel_err: float
    softmax_computed: float
    softmax_printed: float
    softmax_rel_err: float
    exp_ok: bool
    softmax_ok: bool

    @property
    def ok(self) -> bool:
        return self.exp_ok and self.softmax_ok


@dataclass(frozen=True)
class Table1Result:
    rtol: float
    rows: tuple[Table1Row, ...]
    bold_expected: tuple[int, ...]
    bold_predicted: tuple[int, ...]

    @property
    def rows_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def bold_ok(self) -> bool:
        return self.bold_expected == self.bold_predicted

    @property
    def all_ok(self) -> bool:
        return self.rows_ok and self.bold_ok


def reproduce_table1(
    rtol: float = 5e-3, word_format: QFormat = DEFAULT_WORD_FORMAT
) -> Table1Result:
    """Recompute (input, e**x, softmax) triples for the golden sample sets.

    Each computed value is compared to the printed one at relative tolerance
    ``rtol``; the three highlighted rows must additionally be the classes
    the comparator-tree unit picks from the quantized inputs.
    """
    rows: list[Table1Row] = []
    bold_pred: list[int] = []
    for col in GOLDEN_COLUMNS:
        exps = [exp_reference(x) for x in col.inputs]
        smax = softmax_exact(np.array(col.inputs))
        for i, x in enumerate(col.inputs):
            e_err = abs(exps[i] - col.exp_printed[i]) / abs(col.exp_printed[i])
            s_err = abs(float(smax[i]) - col.softmax_printed[i]) / abs(col.softmax_printed[i])
            rows.append(
                Table1Row(
                    set_label=col.label,
                    x=x,
                    exp_computed=exps[i],
                    exp_printed=col.exp_printed[i],
                    exp_rel_err=e_err,
                    softmax_computed=float(smax[i]),
                    softmax_printed=col.softmax_printed[i],
                    softmax_rel_err=s_err,
                    exp_ok=e_err <= rtol,
                    softmax_ok=s_err <= rtol,
                )
            )
        cfg = ComparatorTreeConfig(len(col.inputs), word_format)
        fixed_inputs = [
            Fixed(int(r), word_format) for r in quantize_vector(col.inputs, word_format)
        ]
        bold_pred.append(argmax_comparator(fixed_inputs, cfg).class_index)
    return Table1Result(
        rtol=rtol,
        rows=tuple(rows),
        bold_expected=tuple(c.bold_index for c in GOLDEN_COLUMNS),
        bold_predicted=tuple(bold_pred),
    )


def render_table1_text(result: Table1Result) -> str:
    """Fixed-width text rendering with one pass/fail flag per row."""
    lines = [
        f"{'set':<14}{'input':>10}  {'exp(x)':>12}  {'printed':>10}  {'rel':>9}"
        f"  {'softmax':>12}  {'printed':>10}  {'rel':>9}  ok"
    ]
    for r in result.rows:
        lines.append(
            f"{r.set_label:<14}{r.x:>10.2f}  {r.exp_computed:>12.4e}  {r.exp_printed:>10.2e}"
            f"  {r.exp_rel_err:>9.2e}  {r.softmax_computed:>12.4e}  {r.softmax_printed:>10.2e}"
            f"  {r.softmax_rel_err:>9.2e}  {'ok' if r.ok else 'FAIL'}"
        )
    lines.append(
        f"rows within rtol={result.rtol:g}: {sum(r.ok for r in result.rows)}/{len(result.rows)}"
    )
    lines.append(
        f"highlighted classes: expected {list(result.bold_expected)}, "
        f"comparator unit picked {list(result.bold_predicted)} "
        f"({'ok' if result.bold_ok else 'FAIL'})"
    )
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# monotonicity curves and CSV plumbing
# --------------------------------------------------------------------------


def emit_monotonicity_data(spec: InputSpec, stream: IO[str]) -> list[tuple[float, float, float]]:
    """Write sorted ``x,exp_x,softmax_x`` rows suitable for plotting.

    Uses the first generated vector of ``spec``; both derived columns are
    strictly increasing wherever the x values are distinct.
    """
    xs = np.sort(gen_uniform(spec)[0])
    smax = softmax_stable(xs)
    rows = [(float(x), exp_reference(float(x)), float(s)) for x, s in zip(xs, smax)]
    writer = csv.writer(stream)
    writer.writerow(["x", "exp_x", "softmax_x"])
    for row in rows:
        writer.writerow([repr(v) for v in row])
    return rows


def read_logits_csv(stream: IO[str]) -> np.ndarray:
    """Parse one logit vector per line; every line must have the same k."""
    vectors: list[list[float]] = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise InputFormatError(f"line {lineno}: {exc}") from None
        if any(not math.isfinite(v) for v in values):
            raise InputFormatError(f"line {lineno}: non-finite logit")
        if vectors and len(values) != len(vectors[0]):
            raise InputFormatError(
                f"line {lineno}: expected {len(vectors[0])} values, got {len(values)}"
            )
        vectors.append(values)
    if not vectors:
        raise InputFormatError("no input vectors found")
    return np.array(vectors, dtype=np.float64)


def write_logits_csv(mat: np.ndarray, stream: IO[str]) -> None:
    for row in np.atleast_2d(mat):
        stream.write(",".join(repr(float(v)) for v in row) + "\n")
