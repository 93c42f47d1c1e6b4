"""Bit-accurate softmax output-stage models for classifier accelerators.

Library layout:

* :mod:`softstage.fixedpoint`    - saturating Q-format arithmetic
* :mod:`softstage.exp_units`     - reference / base-2 LUT / CORDIC exponentials
* :mod:`softstage.softmax_units` - exact, stable, pseudo and inverse softmax
* :mod:`softstage.argmax_unit`   - comparator-tree decision unit and cost model
* :mod:`softstage.harness`       - deterministic experiments and golden checks
* :mod:`softstage.cli`           - the ``softstage`` command
"""

from .argmax_unit import (
    ComparatorTreeConfig,
    CostRecord,
    Prediction,
    argmax_comparator,
    argmax_linear,
    cost_of_unit,
    cost_summary,
)
from .exp_units import (
    Base2Decomposition,
    CordicConfig,
    ExpLut,
    build_lut,
    exp_base2,
    exp_base2_decompose,
    exp_cordic,
    exp_reference,
)
from .fixedpoint import (
    Fixed,
    FormatMismatchError,
    QFormat,
    from_real,
    fx_add,
    fx_cmp,
    fx_mul,
    fx_shift,
    fx_sub,
    to_real,
)
from .harness import (
    ExperimentReport,
    InputSpec,
    emit_monotonicity_data,
    gen_uniform,
    reproduce_table1,
    run_agreement,
)
from .softmax_units import (
    SoftmaxOverflowError,
    cross_entropy,
    inverse_softmax,
    predict_inverse,
    pseudo_softmax_base2,
    softmax_exact,
    softmax_stable,
)

__version__ = "0.1.0"
