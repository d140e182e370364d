"""Transform and spectrum tests on the discrete cube.

The reference quantities come from brute-force sums over the product
measure, computed inline, so each identity is checked against an
implementation-independent oracle.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noise_lab.cube import (
    BoolFn,
    biased_char,
    build_function,
    char_values,
    expectation,
    expected_pivotal_count,
    fourier_transform,
    fourier_transform_direct,
    inverse_transform,
    level_weights,
    load_table,
    measure_weights,
    noise_correlation,
    pivotal_marginals,
    pivotal_set,
    spectral_sample,
    variance,
)


@st.composite
def random_fn(draw, max_n=6, boolean=False):
    n = draw(st.integers(min_value=1, max_value=max_n))
    if boolean:
        bits = draw(st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n))
        table = np.array(bits, dtype=np.float64)
    else:
        vals = draw(st.lists(
            st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False, width=32),
            min_size=1 << n, max_size=1 << n))
        table = np.array(vals, dtype=np.float64)
    return BoolFn(n, table)


bias_points = st.sampled_from([0.2, 0.3, 0.5, 0.7, 0.85])


class TestCharacters:
    def test_char_values_half_bias(self):
        lo, hi = char_values(0.5)
        assert lo == 1.0 and hi == -1.0

    def test_biased_char_frozen_value(self):
        # omega has bit 1 set and bit 2 clear; S = {1, 2}; p = 1/4:
        # (-sqrt(3)) * sqrt(1/3) = -1
        assert abs(biased_char(0b01, 0b11, 0.25) - (-1.0)) < 1e-15

    def test_single_bit_values(self):
        p = 0.3
        assert abs(biased_char(0, 1, p) - np.sqrt(p / (1 - p))) < 1e-15
        assert abs(biased_char(1, 1, p) + np.sqrt((1 - p) / p)) < 1e-15

    @given(st.integers(1, 5), bias_points, st.data())
    @settings(max_examples=40, deadline=None)
    def test_orthonormality(self, n, p, data):
        s1 = data.draw(st.integers(0, (1 << n) - 1))
        s2 = data.draw(st.integers(0, (1 << n) - 1))
        w = measure_weights(n, p)
        dot = sum(
            w[om] * biased_char(om, s1, p) * biased_char(om, s2, p)
            for om in range(1 << n)
        )
        assert abs(dot - (1.0 if s1 == s2 else 0.0)) < 1e-10

    def test_mean_zero_under_own_bias(self):
        p = 0.7
        w = mw = measure_weights(1, p)
        assert abs(w[0] * biased_char(0, 1, p) + mw[1] * biased_char(1, 1, p)) < 1e-15


class TestMeasure:
    @given(st.integers(1, 8), bias_points)
    @settings(max_examples=30, deadline=None)
    def test_weights_sum_to_one(self, n, p):
        assert abs(measure_weights(n, p).sum() - 1.0) < 1e-12

    def test_weights_product_form(self):
        w = measure_weights(3, 0.3)
        for om in range(8):
            want = 1.0
            for i in range(3):
                want *= 0.3 if (om >> i) & 1 else 0.7
            assert abs(w[om] - want) < 1e-15


class TestTransform:
    @given(random_fn(), bias_points)
    @settings(max_examples=50, deadline=None)
    def test_butterfly_matches_direct(self, f, p):
        fast = fourier_transform(f, p).coeffs
        slow = fourier_transform_direct(f, p).coeffs
        assert np.allclose(fast, slow, rtol=0, atol=1e-11)

    @given(random_fn(), bias_points)
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, f, p):
        back = inverse_transform(fourier_transform(f, p))
        assert np.allclose(back.values, f.values, rtol=0, atol=1e-11)

    def test_half_bias_is_walsh_hadamard(self):
        rng = np.random.default_rng(2)
        f = BoolFn(4, rng.uniform(-1, 1, 16))
        got = fourier_transform(f, 0.5).coeffs
        for s in range(16):
            signs = [(-1) ** bin(s & om).count("1") for om in range(16)]
            want = float(np.dot(signs, f.values)) / 16.0
            assert abs(got[s] - want) < 1e-12

    @given(random_fn(max_n=7), bias_points)
    @settings(max_examples=40, deadline=None)
    def test_parseval(self, f, p):
        c = fourier_transform(f, p).coeffs
        w = measure_weights(f.n, p)
        second_moment = float(w @ (f.values * f.values))
        assert abs(float(c @ c) - second_moment) < 1e-10

    def test_constant_function_concentrates_on_empty_set(self):
        f = BoolFn(3, np.full(8, 0.625))
        c = fourier_transform(f, 0.4).coeffs
        assert abs(c[0] - 0.625) < 1e-15
        assert np.abs(c[1:]).max() < 1e-15

    def test_level_weights_partition_second_moment(self):
        f = build_function("majority:5")
        spec = fourier_transform(f, 0.35)
        lw = level_weights(spec)
        assert lw.shape == (6,)
        assert abs(lw.sum() - float(spec.coeffs @ spec.coeffs)) < 1e-12

    def test_expectation_and_variance_against_sums(self):
        f = build_function("tribes:2:2")
        for p in (0.25, 0.5, 0.8):
            w = measure_weights(4, p)
            mean = float(w @ f.values)
            assert abs(expectation(f, p) - mean) < 1e-12
            assert abs(variance(f, p) - (float(w @ (f.values**2)) - mean**2)) < 1e-12

    def test_bias_validation(self):
        f = build_function("dictator:1")
        for bad in (0.0, 1.0, -0.1, 1.3):
            with pytest.raises(ValueError):
                fourier_transform(f, bad)


class TestBuilders:
    def test_dictator(self):
        # n coordinates, value copies coordinate 0
        f = build_function("dictator:2")
        assert f.n == 2
        assert f.values.tolist() == [0.0, 1.0, 0.0, 1.0]

    def test_parity(self):
        f = build_function("parity:3")
        assert [int(v) for v in f.values] == [bin(om).count("1") % 2 for om in range(8)]

    def test_majority_rejects_even(self):
        with pytest.raises(ValueError):
            build_function("majority:4")

    def test_majority_3(self):
        f = build_function("majority:3")
        assert [int(v) for v in f.values] == [0, 0, 0, 1, 0, 1, 1, 1]

    def test_and_or(self):
        f_and = build_function("and:2")
        f_or = build_function("or:2")
        assert f_and.values.tolist() == [0.0, 0.0, 0.0, 1.0]
        assert f_or.values.tolist() == [0.0, 1.0, 1.0, 1.0]

    def test_tribes_layout(self):
        # k:m = m tribes of size k; OR of per-tribe ANDs
        f = build_function("tribes:2:2")
        for om in range(16):
            t1 = (om & 0b0011) == 0b0011
            t2 = (om & 0b1100) == 0b1100
            assert f.values[om] == float(t1 or t2)

    def test_chi_is_unit_norm_character(self):
        f = build_function("chi:3:0.4")
        w = measure_weights(3, 0.4)
        assert abs(float(w @ (f.values**2)) - 1.0) < 1e-12
        # matches the explicit product character
        for om in range(8):
            assert abs(f.values[om] - biased_char(om, 0b111, 0.4)) < 1e-12

    def test_crossing_function(self):
        f = build_function("crossing:1:1")
        assert f.n == 4
        # crossing iff either horizontal edge (bits 0, 1) is present
        for om in range(16):
            assert f.values[om] == float(bool(om & 0b11))

    def test_monotonicity_flags(self):
        assert build_function("majority:5").is_monotone
        assert build_function("tribes:2:3").is_monotone
        assert not build_function("parity:2").is_monotone

    def test_table_round_trip(self, tmp_path):
        # first token the coordinate count, then 2^n values in mask order
        path = tmp_path / "table.txt"
        path.write_text("2\n0 1 1 0\n")
        f = load_table(str(path))
        assert f.n == 2
        assert f.values.tolist() == [0.0, 1.0, 1.0, 0.0]
        g = build_function(f"table:{path}")
        assert np.array_equal(g.values, f.values)

    def test_table_length_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n0 1 1\n")
        with pytest.raises(ValueError):
            load_table(str(path))

    def test_size_guard(self):
        with pytest.raises(ValueError):
            build_function("parity:25")
        with pytest.raises(ValueError):
            build_function("parity:4", max_bits=3)


class TestNoiseCorrelation:
    def test_majority3_frozen_value(self):
        f = build_function("majority:3")
        want = 13.0 / 128.0
        assert abs(noise_correlation(f, 0.5, 0.5) - want) < 1e-14
        assert abs(noise_correlation(f, 0.5, 0.5, mode="direct") - want) < 1e-12

    def test_eps_boundaries(self):
        f = build_function("tribes:2:2")
        for p in (0.3, 0.5, 0.7):
            assert abs(noise_correlation(f, p, 0.0) - variance(f, p)) < 1e-12
            assert abs(noise_correlation(f, p, 1.0)) < 1e-12

    @given(random_fn(max_n=5), bias_points, st.sampled_from([0.0, 0.1, 0.5, 0.9, 1.0]))
    @settings(max_examples=40, deadline=None)
    def test_spectral_matches_direct(self, f, p, eps):
        a = noise_correlation(f, p, eps, mode="spectral")
        b = noise_correlation(f, p, eps, mode="direct")
        assert abs(a - b) < 1e-10

    def test_direct_mode_cap(self):
        f = BoolFn(13, np.zeros(1 << 13))
        with pytest.raises(ValueError):
            noise_correlation(f, 0.5, 0.1, mode="direct")


class TestPivotalAndSpectralSample:
    def test_pivotal_set_dictator(self):
        f = build_function("dictator:2")
        for om in range(4):
            assert pivotal_set(f, om) == 0b01

    def test_pivotal_set_majority(self):
        f = build_function("majority:3")
        # at 0b011 the two set bits are pivotal, the third is not
        assert pivotal_set(f, 0b011) == 0b011

    def test_expected_counts(self):
        assert abs(expected_pivotal_count(build_function("parity:4"), 0.5) - 4.0) < 1e-12
        assert abs(expected_pivotal_count(build_function("dictator:3"), 0.5) - 1.0) < 1e-12
        assert abs(expected_pivotal_count(build_function("majority:3"), 0.5) - 1.5) < 1e-12

    def test_pivotal_marginals_majority(self):
        marg = pivotal_marginals(build_function("majority:3"))
        assert np.allclose(marg, [0.5, 0.5, 0.5], atol=1e-12)

    def test_requires_boolean_values(self):
        f = BoolFn(2, np.array([0.0, 0.5, 1.0, 1.0]))
        with pytest.raises(ValueError):
            pivotal_marginals(f)

    def test_chi_spectral_sample_is_full_set(self):
        d = spectral_sample(build_function("chi:2:0.5"))
        assert abs(d.weights[0b11] - 1.0) < 1e-12
        assert abs(d.mean_size() - 2.0) < 1e-12
        assert np.allclose(d.marginals(), [1.0, 1.0], atol=1e-12)

    def test_sample_weights_sum_to_one(self):
        d = spectral_sample(build_function("majority:5"))
        assert abs(d.weights.sum() - 1.0) < 1e-12

    def test_marginal_identity_vs_pivotal(self):
        # for {0,1}-valued f: P(i pivotal at 1/2) = 4 E[f^2] P(i in S).
        # (the squared discrete derivative is 1/4 exactly on pivotal points)
        rng = np.random.default_rng(31)
        named = ["dictator:1", "parity:3", "majority:3", "crossing:1:1"]
        fns = [build_function(d) for d in named]
        for _ in range(20):
            n = int(rng.integers(1, 8))
            fns.append(BoolFn(n, (rng.random(1 << n) < 0.5).astype(np.float64)))
        for f in fns:
            if not f.values.any():
                continue
            m2 = float(measure_weights(f.n, 0.5) @ (f.values**2))
            lhs = pivotal_marginals(f, 0.5)
            rhs = 4.0 * m2 * spectral_sample(f).marginals()
            assert np.allclose(lhs, rhs, atol=1e-10)
