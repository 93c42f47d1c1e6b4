"""Q-format arithmetic: rounding, saturation, ordering, determinism."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softstage.fixedpoint import (
    Fixed,
    FormatMismatchError,
    QFormat,
    from_real,
    fx_add,
    fx_cmp,
    fx_mul,
    fx_neg,
    fx_shift,
    fx_sub,
    quantize_vector,
    real_vector,
    to_real,
)

Q44 = QFormat(4, 4)
Q34 = QFormat(3, 4)
SQ78 = QFormat(7, 8)


class TestQFormat:
    def test_string_round_trip(self):
        for text in ("sQ7.8", "uQ0.16", "sQ2.14", "sQ12.18"):
            assert str(QFormat.from_string(text)) == text

    @pytest.mark.parametrize("bad", ["Q7.8", "sQ7", "sq7.8", "7.8", "sQ-1.8", ""])
    def test_bad_strings_rejected(self, bad):
        with pytest.raises(ValueError):
            QFormat.from_string(bad)

    def test_width_cap(self):
        QFormat(31, 32)  # 64 bits, fine
        with pytest.raises(ValueError):
            QFormat(32, 32)  # 65 with sign
        QFormat(32, 32, signed=False)  # exactly 64 unsigned

    def test_raw_bounds(self):
        assert (Q34.min_raw, Q34.max_raw) == (-128, 127)
        u = QFormat(3, 4, signed=False)
        assert (u.min_raw, u.max_raw) == (0, 127)

    def test_resolution(self):
        assert SQ78.ulp == 2.0**-8


class TestFromToReal:
    def test_known_values(self):
        assert from_real(1.5, Q44).raw == 24
        assert from_real(0.0, Q44).raw == 0
        assert from_real(1000.0, Q34).raw == 127
        assert to_real(from_real(1000.0, Q34)) == 7.9375
        assert to_real(Fixed(24, Q44)) == 1.5
        assert to_real(Fixed(0, Q44)) == 0.0
        assert to_real(Fixed(-16, Q44)) == -1.0

    def test_negative_saturation(self):
        assert from_real(-1000.0, Q34).raw == -128

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            from_real(math.nan, Q44)

    def test_round_half_to_even(self):
        # scaled values 0.5 and 1.5: ties round to the even raw
        assert from_real(0.5 * Q34.ulp, Q34).raw == 0
        assert from_real(1.5 * Q34.ulp, Q34).raw == 2
        assert from_real(-0.5 * Q34.ulp, Q34).raw == 0
        assert from_real(-1.5 * Q34.ulp, Q34).raw == -2

    @given(st.floats(min_value=-7.9, max_value=7.9))
    def test_round_trip_within_half_ulp(self, v):
        assert abs(to_real(from_real(v, Q34)) - v) <= Q34.ulp / 2

    def test_infinite_input_saturates(self):
        assert from_real(math.inf, Q34).raw == Q34.max_raw
        assert from_real(-math.inf, Q34).raw == Q34.min_raw


raw34 = st.integers(min_value=Q34.min_raw, max_value=Q34.max_raw)


class TestArithmetic:
    def test_known_values(self):
        one = from_real(1.0, Q34)
        assert to_real(fx_add(one, one)) == 2.0
        assert to_real(fx_shift(one, 2)) == 4.0
        mx = Fixed(Q34.max_raw, Q34)
        assert fx_mul(mx, mx).raw == Q34.max_raw

    def test_mul_rounds_to_nearest_even(self):
        # 3/16 * 3/16 = 9/256 = 0.5625 ulp -> rounds to 1 ulp (nearest)
        a = Fixed(3, Q34)
        assert fx_mul(a, a).raw == 1
        # 2/16 * 2/16 = 4/256 = 0.25 ulp -> rounds to 0
        b = Fixed(2, Q34)
        assert fx_mul(b, b).raw == 0
        # 0.5 ulp tie: 8/16 * 1/16 = 0.5 ulp -> even (0)
        assert fx_mul(Fixed(8, Q34), Fixed(1, Q34)).raw == 0
        # 1.5 ulp tie: 8/16 * 3/16 -> even (2)
        assert fx_mul(Fixed(8, Q34), Fixed(3, Q34)).raw == 2

    def test_right_shift_rounds(self):
        assert fx_shift(Fixed(3, Q34), -1).raw == 2  # 1.5 -> even
        assert fx_shift(Fixed(5, Q34), -1).raw == 2  # 2.5 -> even
        assert fx_shift(Fixed(-3, Q34), -1).raw == -2

    def test_format_mismatch(self):
        with pytest.raises(FormatMismatchError):
            fx_add(from_real(1.0, Q34), from_real(1.0, Q44))
        with pytest.raises(FormatMismatchError):
            fx_cmp(from_real(1.0, Q34), from_real(1.0, Q44))

    @given(raw34, raw34)
    def test_saturation_closed(self, ra, rb):
        a, b = Fixed(ra, Q34), Fixed(rb, Q34)
        for result in (fx_add(a, b), fx_sub(a, b), fx_mul(a, b), fx_neg(a)):
            assert Q34.min_raw <= result.raw <= Q34.max_raw

    @given(raw34, st.integers(min_value=-12, max_value=12))
    def test_shift_saturation_closed(self, ra, n):
        r = fx_shift(Fixed(ra, Q34), n)
        assert Q34.min_raw <= r.raw <= Q34.max_raw

    @given(raw34, raw34)
    def test_cmp_matches_real_order(self, ra, rb):
        a, b = Fixed(ra, Q34), Fixed(rb, Q34)
        expected = (to_real(a) > to_real(b)) - (to_real(a) < to_real(b))
        assert fx_cmp(a, b) == expected

    def test_determinism(self):
        pairs = [(Fixed(i * 7 % 251 - 125, Q34), Fixed(i * 13 % 251 - 125, Q34)) for i in range(64)]
        first = [(fx_add(a, b).raw, fx_mul(a, b).raw) for a, b in pairs]
        second = [(fx_add(a, b).raw, fx_mul(a, b).raw) for a, b in pairs]
        assert first == second


class TestVectorized:
    def test_matches_scalar(self):
        rng = np.random.default_rng(3)
        vals = rng.uniform(-300, 300, size=500)  # exercises saturation too
        raws = quantize_vector(vals, SQ78)
        assert raws.tolist() == [from_real(float(v), SQ78).raw for v in vals]

    def test_wide_format_fallback(self):
        wide = QFormat(30, 30)
        vals = [1.25, -3.5, 2.0**29, -(2.0**31)]
        raws = quantize_vector(vals, wide)
        assert raws.tolist() == [from_real(v, wide).raw for v in vals]

    def test_real_vector_inverse(self):
        raws = quantize_vector([0.25, -1.5, 3.0], Q34)
        np.testing.assert_array_equal(real_vector(raws, Q34), [0.25, -1.5, 3.0])
