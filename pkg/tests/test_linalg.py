"""Tests for rounding-aware linear algebra: exact accumulation, single
rounding semantics, draw accounting, and the wide-integer fallback."""

from fractions import Fraction

import numpy as np
import pytest

from fxsim import (
    FxMatrix,
    FxValue,
    QFormat,
    RngStream,
    RoundingMode,
    RoundingStats,
    requantize,
    rounded_dot,
    rounded_elementwise,
    rounded_matmul,
    rounded_row_mean,
    rounded_sum_mean,
)
from fxsim.linalg import WideAccumulator, exact_elementwise

M = RoundingMode
Q168 = QFormat(16, 8)


def fx(arr, fmt=Q168):
    return FxMatrix.from_real(np.asarray(arr, dtype=np.float64), fmt, M.NEAREST_EVEN)


def oracle_dot_floor(x: FxMatrix, y: FxMatrix, divisor: int) -> int:
    """Independent expected mantissa via exact rational arithmetic."""
    s = sum(Fraction(int(a)) * Fraction(int(b))
            for a, b in zip(x.mantissas.ravel(), y.mantissas.ravel()))
    target = s / (divisor * x.fmt.scale)
    return target.__floor__()


class TestRoundedDot:
    def test_representable_result_passes_through(self):
        fmt = QFormat(16, 1)
        x = fx([[0.5, 0.5]], fmt)
        y = fx([[1.0], [1.0]], fmt)
        r = rounded_dot(x, y, divisor=2, mode=M.NEAREST_EVEN)
        assert r.value == 0.5

    def test_tie_to_even_at_zero(self):
        # two quarter-delta inputs sum to delta/2: tie, floor mantissa 0 is even
        fine = QFormat(32, 10)
        x = FxMatrix(np.array([[1, 1]], dtype=np.int64), fine)   # delta/4 units at 2f
        y = FxMatrix(np.array([[256], [256]], dtype=np.int64), fine)
        # accumulated product = 512 / 2**10 = 0.5 in scaled units -> tie
        r = rounded_dot(x, y, divisor=1, mode=M.NEAREST_EVEN)
        assert r.mantissa == 0

    @pytest.mark.parametrize("mode", [M.FLOOR, M.CEIL, M.NEAREST_EVEN])
    def test_matches_rational_oracle_deterministic(self, mode):
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(1, 12))
            x = fx(rng.uniform(-2, 2, (1, n)))
            y = fx(rng.uniform(-2, 2, (n, 1)))
            divisor = int(rng.integers(1, 9))
            r = rounded_dot(x, y, divisor=divisor, mode=mode)
            lo = oracle_dot_floor(x, y, divisor)
            s = sum(Fraction(int(a)) * Fraction(int(b))
                    for a, b in zip(x.mantissas.ravel(), y.mantissas.ravel()))
            frac = s / (divisor * Q168.scale) - lo
            if mode is M.FLOOR:
                expect = lo
            elif mode is M.CEIL:
                expect = lo if frac == 0 else lo + 1
            else:
                if frac < Fraction(1, 2):
                    expect = lo
                elif frac > Fraction(1, 2):
                    expect = lo + 1
                else:
                    expect = lo if lo % 2 == 0 else lo + 1
            assert r.mantissa == expect

    def test_one_draw_per_stochastic_dot(self):
        x, y = fx([[0.3, -0.7, 1.1]]), fx([[0.2], [0.9], [-0.4]])
        for mode in (M.CSR, M.RR):
            rng = RngStream(3)
            rounded_dot(x, y, divisor=3, mode=mode, rng=rng)
            assert rng.draws == 1
        rng = RngStream(3)
        rounded_dot(x, y, divisor=3, mode=M.NEAREST_EVEN, rng=rng)
        assert rng.draws == 0

    def test_permutation_invariance(self):
        # exact accumulation: term order cannot change the one rounded result
        rng = np.random.default_rng(11)
        xs = rng.uniform(-1, 1, 9)
        ys = rng.uniform(-1, 1, 9)
        perm = rng.permutation(9)
        x1, y1 = fx(xs[None, :]), fx(ys[:, None])
        x2, y2 = fx(xs[perm][None, :]), fx(ys[perm][:, None])
        r1 = rounded_dot(x1, y1, divisor=4, mode=M.CSR, rng=RngStream(77))
        r2 = rounded_dot(x2, y2, divisor=4, mode=M.CSR, rng=RngStream(77))
        assert r1 == r2

    def test_small_over_large_contrast(self):
        # inputs inside one grid cell: nearest kills them, the constant-
        # probability mode keeps information flowing
        fmt = Q168
        rng_in = np.random.default_rng(0)
        zeros = {M.NEAREST_EVEN: 0, M.RR: 0}
        trials = 60
        streams = {m: RngStream(1) for m in zeros}
        for _ in range(trials):
            xv = rng_in.uniform(-fmt.delta / 2, fmt.delta / 2, (1, 100))
            yv = rng_in.uniform(0, 100, (100, 1))
            for m in zeros:
                x = FxMatrix.from_real(xv, fmt, m, streams[m])
                y = FxMatrix.from_real(yv, fmt, m, streams[m])
                r = rounded_dot(x, y, divisor=100, mode=m, rng=streams[m])
                zeros[m] += r.mantissa == 0
        assert zeros[M.NEAREST_EVEN] == trials
        assert zeros[M.RR] < trials / 2

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            rounded_dot(fx([[1.0, 2.0]]), fx([[1.0]]), mode=M.FLOOR)


class TestRoundedMatmul:
    def test_identity_preserves_quantized_matrix(self):
        eye = fx(np.eye(4))
        b = fx(np.random.default_rng(2).uniform(-3, 3, (4, 5)))
        out = rounded_matmul(eye, b, M.NEAREST_EVEN)
        assert np.array_equal(out.mantissas, b.mantissas)

    def test_1x1_reduces_to_dot(self):
        x, y = fx([[0.37, 1.2, -0.5]]), fx([[0.9], [-1.1], [0.3]])
        a = rounded_matmul(x, y, M.CSR, RngStream(5), divisor=3)
        b = rounded_dot(x, y, divisor=3, mode=M.CSR, rng=RngStream(5))
        assert a.mantissas[0, 0] == b.mantissa

    def test_zero_matmul_rr_perturbation(self):
        z = FxMatrix.zeros(2, 2, Q168)
        out = rounded_matmul(z, z, M.RR, RngStream(9))
        assert set(out.mantissas.ravel()) <= {0, 1}
        # enumeration oracle: each entry is delta w.p. 1/2; over many draws
        rng = RngStream(10)
        ups = [rounded_matmul(z, z, M.RR, rng).mantissas.sum() for _ in range(500)]
        assert abs(np.mean(ups) / 4 - 0.5) < 0.06
        for mode in (M.FLOOR, M.CEIL, M.NEAREST_EVEN, M.CSR):
            out = rounded_matmul(z, z, mode, RngStream(4))
            assert np.all(out.mantissas == 0)

    def test_draws_row_major_one_per_entry(self):
        a = fx(np.random.default_rng(0).uniform(-1, 1, (3, 4)))
        b = fx(np.random.default_rng(1).uniform(-1, 1, (4, 2)))
        rng = RngStream(8)
        rounded_matmul(a, b, M.CSR, rng)
        assert rng.draws == 6
        rng = RngStream(8)
        rounded_matmul(a, b, M.NEAREST_EVEN, rng)
        assert rng.draws == 0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            rounded_matmul(fx(np.ones((2, 3))), fx(np.ones((2, 3))), M.FLOOR)

    def test_wide_format_falls_back_to_exact_ints(self):
        # 60-bit mantissas overflow the float64-exact window; results must
        # still match the rational oracle
        fmt = QFormat(64, 20)
        big = 3 << 55
        a = FxMatrix(np.array([[big, -big + 7]], dtype=np.int64), fmt)
        b = FxMatrix(np.array([[big - 3], [big]], dtype=np.int64), fmt)
        out = rounded_matmul(a, b, M.FLOOR, divisor=7)
        s = Fraction(big) * (big - 3) + Fraction(-big + 7) * big
        expect = (s / (7 * fmt.scale)).__floor__()
        expect = max(min(expect, fmt.max_mantissa), fmt.min_mantissa)
        assert out.mantissas[0, 0] == expect

    def test_saturation_counted(self):
        fmt = QFormat(8, 4)
        a = FxMatrix(np.full((1, 4), fmt.max_mantissa, dtype=np.int64), fmt)
        b = FxMatrix(np.full((4, 1), fmt.max_mantissa, dtype=np.int64), fmt)
        stats = RoundingStats()
        out = rounded_matmul(a, b, M.NEAREST_EVEN, stats=stats)
        assert out.mantissas[0, 0] == fmt.max_mantissa
        assert stats.saturations == 1


class TestRoundedSumMean:
    def test_grid_mean_all_modes_except_rr(self):
        vals = [FxValue(1, Q168)] * 4
        for mode in (M.FLOOR, M.CEIL, M.NEAREST_EVEN, M.CSR):
            assert rounded_sum_mean(vals, 4, mode, RngStream(0)).mantissa == 1

    def test_grid_mean_rr_coin(self):
        vals = [FxValue(1, Q168)] * 4
        rng = RngStream(6)
        out = {rounded_sum_mean(vals, 4, M.RR, rng).mantissa for _ in range(200)}
        assert out == {1, 2}

    def test_zeros_stay_zero(self):
        vals = [FxValue(0, Q168)] * 7
        for mode in (M.NEAREST_EVEN, M.CSR):
            assert rounded_sum_mean(vals, 7, mode, RngStream(1)).mantissa == 0

    def test_csr_empirical_mean_matches_exact_mean(self):
        # mid-cell quotient: empirical mean over repeats within 4 sigma
        vals = [FxValue(1, Q168)] * 3  # sum 3, n=10 -> 0.3 in mantissa units
        n_rep = 100_000
        rng = RngStream(123)
        outs = np.array([rounded_sum_mean(vals, 10, M.CSR, rng).mantissa
                         for _ in range(n_rep)], dtype=np.float64)
        p_up = 0.3
        sigma = np.sqrt(p_up * (1 - p_up) / n_rep)
        assert abs(outs.mean() - p_up) < 4 * sigma

    def test_mixed_formats_rejected(self):
        with pytest.raises(ValueError):
            rounded_sum_mean([FxValue(1, Q168), FxValue(1, QFormat(16, 7))], 2,
                             M.FLOOR)

    def test_headroom_bits(self):
        assert WideAccumulator.for_terms(1).headroom_bits == 0
        assert WideAccumulator.for_terms(2).headroom_bits == 1
        assert WideAccumulator.for_terms(11982).headroom_bits == 14


class TestRowMean:
    def test_row_means_match_sum_mean(self):
        rng = np.random.default_rng(3)
        a = fx(rng.uniform(-2, 2, (5, 9)))
        out = rounded_row_mean(a, M.NEAREST_EVEN)
        for i in range(5):
            vals = [FxValue(int(m), Q168) for m in a.mantissas[i]]
            assert out.mantissas[i, 0] == rounded_sum_mean(vals, 9, M.NEAREST_EVEN).mantissa


class TestElementwise:
    def test_add_exact_on_grid(self):
        a, b = fx([[0.25, -1.5]]), fx([[0.5, 0.25]])
        for mode in (M.NEAREST_EVEN, M.CSR):
            out = rounded_elementwise("add", a, b, mode, RngStream(2))
            assert np.array_equal(out.mantissas, a.mantissas + b.mantissas)

    def test_sub_self_is_zero(self):
        a = fx(np.random.default_rng(1).uniform(-2, 2, (3, 3)))
        for mode in (M.NEAREST_EVEN, M.CSR):
            out = rounded_elementwise("sub", a, a, mode, RngStream(2))
            assert np.all(out.mantissas == 0)

    def test_mul_rescales_product_grid(self):
        fmt = QFormat(16, 4)
        a = FxMatrix(np.array([[3]], dtype=np.int64), fmt)   # 3/16
        b = FxMatrix(np.array([[5]], dtype=np.int64), fmt)   # 5/16
        out = rounded_elementwise("mul", a, b, M.NEAREST_EVEN)
        # 15/256 = 0.9375 * delta -> nearest mantissa 1
        assert out.mantissas[0, 0] == 1

    def test_column_broadcast_bias(self):
        a = fx(np.zeros((3, 4)))
        col = fx([[0.25], [0.5], [-0.25]])
        out = rounded_elementwise("add", a, col, M.NEAREST_EVEN)
        assert np.array_equal(out.mantissas, np.repeat(col.mantissas, 4, axis=1))

    def test_bad_broadcast_rejected(self):
        with pytest.raises(ValueError):
            rounded_elementwise("add", fx(np.zeros((3, 4))), fx(np.zeros((1, 4))),
                                M.FLOOR)

    def test_rr_perturbs_grid_sums(self):
        a = fx(np.zeros((1, 400)))
        out = rounded_elementwise("add", a, a, M.RR, RngStream(5))
        frac_up = np.mean(out.mantissas == 1)
        assert 0.4 < frac_up < 0.6

    def test_exact_elementwise_never_draws_never_moves(self):
        a = fx(np.random.default_rng(7).uniform(-3, 3, (4, 4)))
        b = fx(np.random.default_rng(8).uniform(-3, 3, (4, 4)))
        out = exact_elementwise("add", a, b)
        assert np.array_equal(out.mantissas, a.mantissas + b.mantissas)
        with pytest.raises(ValueError):
            exact_elementwise("mul", a, b)

    def test_exact_elementwise_saturates(self):
        fmt = QFormat(8, 0)
        a = FxMatrix(np.array([[fmt.max_mantissa]], dtype=np.int64), fmt)
        stats = RoundingStats()
        out = exact_elementwise("add", a, a, stats)
        assert out.mantissas[0, 0] == fmt.max_mantissa
        assert stats.saturations == 1


class TestRequantize:
    def test_identity_for_non_rr(self):
        a = fx(np.random.default_rng(2).uniform(-2, 2, (3, 3)))
        for mode in (M.FLOOR, M.CEIL, M.NEAREST_EVEN, M.CSR):
            out = requantize(a, mode, RngStream(1))
            assert np.array_equal(out.mantissas, a.mantissas)

    def test_rr_moves_grid_points_up_half_the_time(self):
        a = fx(np.zeros((20, 20)))
        out = requantize(a, M.RR, RngStream(3))
        frac = np.mean(out.mantissas == 1)
        assert 0.44 < frac < 0.56
        assert set(out.mantissas.ravel()) == {0, 1}
