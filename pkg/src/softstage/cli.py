"""Command-line front end for the softmax-stage units and experiments.

Subcommands:
    predict      class index per CSV input line, for a chosen variant
    compare      agreement/error report between variants (JSON)
    table1       recompute the golden sample table and check tolerances
    emit-curves  sorted x,exp_x,softmax_x CSV for plotting
    cost         structural cost record of a unit (JSON)
    gen          generate a deterministic uniform input CSV

All numeric flags are decimal; word formats use the sQ<int>.<frac> /
uQ<int>.<frac> spelling.  ``-`` means stdin/stdout.  The default seed can be
overridden with the SOFTSTAGE_SEED environment variable.  Identical flags
and inputs always produce byte-identical primary output.

Exit codes: 0 success, 1 check failed (table1), 2 usage error,
3 malformed input, 4 numeric overflow.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from typing import IO, Iterator

import numpy as np

from .argmax_unit import (
    ComparatorTreeConfig,
    VARIANT_NAMES,
    argmax_comparator,
    cost_of_unit,
    cost_summary,
)
from .exp_units import build_lut, exp_base2
from .fixedpoint import Fixed, QFormat, fx_sub, quantize_vector
from .harness import (
    DEFAULT_ADDR_BITS,
    DEFAULT_LUT_FORMAT,
    DEFAULT_OUT_FORMAT,
    DEFAULT_WORD_FORMAT,
    InputFormatError,
    InputSpec,
    emit_monotonicity_data,
    gen_uniform,
    read_logits_csv,
    render_table1_text,
    reproduce_table1,
    run_agreement,
    write_logits_csv,
)
from .softmax_units import (
    SoftmaxOverflowError,
    inverse_softmax,
    predict_inverse,
    softmax_exact,
    softmax_stable,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_OVERFLOW = 4

DEFAULT_SEED = 1


def _default_seed() -> int:
    return int(os.environ.get("SOFTSTAGE_SEED", DEFAULT_SEED))


@contextlib.contextmanager
def _open_in(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as f:
            yield f


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            yield f


def _qformat(text: str) -> QFormat:
    try:
        return QFormat.from_string(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softstage",
        description="Softmax output-stage units, their argmax-only replacement, "
        "and the experiments comparing them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="one class index per CSV input line")
    p.add_argument("--input", default="-", help="logit CSV path or - for stdin")
    p.add_argument("--output", default="-", help="output path or - for stdout")
    p.add_argument(
        "--variant",
        required=True,
        choices=["exact", "stable", "base2", "inverse", "reduced"],
    )
    p.add_argument("--format", type=_qformat, default=DEFAULT_WORD_FORMAT,
                   help="datapath word for quantized variants (default sQ7.8)")
    p.add_argument("--addr-bits", type=int, default=DEFAULT_ADDR_BITS)
    p.add_argument("--lut-format", type=_qformat, default=DEFAULT_LUT_FORMAT)

    p = sub.add_parser("compare", help="agreement report between variants (JSON)")
    p.add_argument("--variants", required=True,
                   help="comma-separated subset of exact,stable,base2,inverse,reduced")
    p.add_argument("--oracle", default="stable")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", type=_qformat, default=DEFAULT_WORD_FORMAT)
    p.add_argument("--addr-bits", type=int, default=DEFAULT_ADDR_BITS)
    p.add_argument("--lut-format", type=_qformat, default=DEFAULT_LUT_FORMAT)
    p.add_argument("--out-format", type=_qformat, default=DEFAULT_OUT_FORMAT)
    p.add_argument("--output", default="-")

    p = sub.add_parser("table1", help="recompute the golden sample table")
    p.add_argument("--rtol", type=float, default=5e-3)
    p.add_argument("--output", default="-")

    p = sub.add_parser("emit-curves", help="sorted x,exp_x,softmax_x CSV")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--n", type=int, default=10, help="number of sample points")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default="-")

    p = sub.add_parser("cost", help="structural cost record of a unit (JSON)")
    p.add_argument("--variant", required=True, choices=list(VARIANT_NAMES))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--addr-bits", type=int, default=DEFAULT_ADDR_BITS)
    p.add_argument("--value-width", type=int, default=DEFAULT_LUT_FORMAT.width)
    p.add_argument("--iterations", type=int, default=16)
    p.add_argument("--output", default="-")

    p = sub.add_parser("gen", help="deterministic uniform logit CSV")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", default="-")

    return parser


def _cmd_predict(args: argparse.Namespace) -> int:
    with _open_in(args.input) as f:
        mat = read_logits_csv(f)

    if args.variant == "exact":
        classes = np.argmax(softmax_exact(mat), axis=1)
    elif args.variant == "stable":
        classes = np.argmax(softmax_stable(mat), axis=1)
    elif args.variant == "inverse":
        classes = [predict_inverse(inverse_softmax(row)) for row in mat]
    else:
        word = args.format
        raws = quantize_vector(mat, word)
        cfg = ComparatorTreeConfig(mat.shape[1], word)
        lut = build_lut(args.addr_bits, args.lut_format) if args.variant == "base2" else None
        classes = []
        for t in range(mat.shape[0]):
            row = [Fixed(int(r), word) for r in raws[t]]
            if args.variant == "reduced":
                classes.append(argmax_comparator(row, cfg).class_index)
            else:
                m = max(row, key=lambda fx: fx.raw)
                numerators = [exp_base2(fx_sub(xi, m), lut) for xi in row]
                classes.append(argmax_comparator(numerators,
                                                 ComparatorTreeConfig(len(numerators), lut.value_format)).class_index)

    with _open_out(args.output) as out:
        for c in classes:
            out.write(f"{int(c)}\n")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec = InputSpec(args.lo, args.hi, args.k, args.trials, seed)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    report = run_agreement(
        spec,
        variants,
        args.oracle,
        word_format=args.format,
        addr_bits=args.addr_bits,
        lut_format=args.lut_format,
        out_format=args.out_format,
    )
    with _open_out(args.output) as out:
        out.write(report.to_json())
    return EXIT_OK


def _cmd_table1(args: argparse.Namespace) -> int:
    result = reproduce_table1(rtol=args.rtol)
    with _open_out(args.output) as out:
        out.write(render_table1_text(result))
    return EXIT_OK if result.all_ok else EXIT_CHECK_FAILED


def _cmd_emit_curves(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec = InputSpec(args.lo, args.hi, args.n, 1, seed)
    with _open_out(args.output) as out:
        emit_monotonicity_data(spec, out)
    return EXIT_OK


def _cmd_cost(args: argparse.Namespace) -> int:
    import json

    if args.variant == "reduced":
        record = cost_summary(ComparatorTreeConfig(args.k, DEFAULT_WORD_FORMAT))
    else:
        record = cost_of_unit(
            args.variant,
            args.k,
            addr_bits=args.addr_bits,
            value_width=args.value_width,
            iterations=args.iterations,
        )
    with _open_out(args.output) as out:
        out.write(json.dumps(record.as_dict(), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _cmd_gen(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    spec = InputSpec(args.lo, args.hi, args.k, args.trials, seed)
    with _open_out(args.output) as out:
        write_logits_csv(gen_uniform(spec), out)
    return EXIT_OK


_COMMANDS = {
    "predict": _cmd_predict,
    "compare": _cmd_compare,
    "table1": _cmd_table1,
    "emit-curves": _cmd_emit_curves,
    "cost": _cmd_cost,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InputFormatError as exc:
        print(f"softstage: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SoftmaxOverflowError as exc:
        print(f"softstage: overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except ValueError as exc:
        print(f"softstage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
