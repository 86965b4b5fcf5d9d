import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import TOY_INSTANTON, random_graph
from ldpc_instanton.channel import llr_from_noise
from ldpc_instanton.decoder import (
    IMMEDIATE_DECODE,
    DecodeOutcome,
    Outcome,
    decode,
    trace_csv,
    withstand_count,
)
from reference_decoder import naive_decode

# Cycling table of the toy code on input (-3, 1, 3, 3): the one negative
# output rotates through the bits with period 4 while magnitudes grow.
TOY_TABLE = np.array(
    [
        [-3, 1, 3, 3],
        [2, -2, 6, 2],
        [4, 8, -2, 6],
        [8, 4, 12, -2],
        [-2, 12, 4, 20],
        [30, -2, 14, 4],
        [4, 38, -2, 18],
        [20, 4, 48, -2],
        [-2, 24, 4, 56],
    ],
    dtype=np.float64,
)

TOY_H = np.array([-3.0, 1.0, 3.0, 3.0])


def closed_form_row(k):
    n, r = divmod(k, 4)
    return {
        0: (-2, 12 * n, 4, 36 * n - 16),
        1: (36 * n - 6, -2, 12 * n + 2, 4),
        2: (4, 36 * n + 2, -2, 12 * n + 6),
        3: (12 * n + 8, 4, 36 * n + 12, -2),
    }[r]


class TestCyclingTable:
    def test_first_nine_rows_exact(self, toy):
        out = decode(toy, TOY_H, 8, capture_trace=True)
        assert out.kind is Outcome.SURVIVED
        assert out.withstand == 8
        np.testing.assert_array_equal(out.trace, TOY_TABLE)

    def test_closed_forms_to_n_50(self, toy):
        out = decode(toy, TOY_H, 203, capture_trace=True)
        assert out.kind is Outcome.SURVIVED
        for n in range(1, 51):
            for k in range(4 * n, 4 * n + 4):
                if k > 203:
                    break
                np.testing.assert_array_equal(
                    out.trace[k], np.array(closed_form_row(k), dtype=np.float64)
                )


class TestOutcomes:
    def test_decoded_at_input(self, toy, tanner):
        for g in (toy, tanner):
            out = decode(g, np.full(g.n_bits, 0.5), 0)
            assert out.kind is Outcome.DECODED_AT_INPUT
            assert out.withstand == IMMEDIATE_DECODE

    def test_wrong_codeword_at_input(self, toy):
        out = decode(toy, np.full(4, -1.0), 10)
        assert out.kind is Outcome.WRONG_CODEWORD
        assert out.iteration == 0
        assert math.isinf(out.withstand)

    def test_corrected_withstand_offset(self, toy):
        # One mildly bad bit: wrong at input, fixed by the first iteration.
        out = decode(toy, np.array([-0.5, 3.0, 3.0, 3.0]), 10)
        assert out.kind is Outcome.CORRECTED
        assert out.withstand == out.iteration - 1

    def test_toy_instanton_survives_ten_thousand(self, toy):
        """The instanton (10,6,4,4)/7 never produces a valid codeword.

        This is a boundary point of the failure set, so certifying it
        needs the exact rational pipeline: the float64 image of the
        vector is a slightly different point that falls off the boundary
        after a few dozen iterations (and exact arithmetic on that image
        confirms it genuinely does).
        """
        xi = [Fraction(10, 7), Fraction(6, 7), Fraction(4, 7), Fraction(4, 7)]
        assert withstand_count(toy, xi, 10_000, exact=True) == 10_000

    def test_float_image_of_instanton_is_off_the_boundary(self, toy):
        # Exact arithmetic on the rounded vector: the outcome is a real
        # property of the float point, not an artifact of kernel rounding.
        float_wc = withstand_count(toy, TOY_INSTANTON, 10_000)
        exact_wc = withstand_count(toy, TOY_INSTANTON, 10_000, exact=True)
        assert 20 <= exact_wc < 10_000
        assert 20 <= float_wc < 10_000

    def test_zero_noise_immediate(self, toy):
        assert withstand_count(toy, np.zeros(4), 100) == IMMEDIATE_DECODE

    def test_n_max_zero_legal(self, toy):
        out = decode(toy, TOY_H, 0)
        assert out.kind is Outcome.SURVIVED
        assert out.withstand == 0

    def test_length_mismatch(self, toy):
        with pytest.raises(ValueError, match="length"):
            decode(toy, np.ones(5), 3)

    def test_all_zero_input_is_fixed_point(self, toy, tanner):
        for g in (toy, tanner):
            out = decode(g, np.zeros(g.n_bits), 50, capture_trace=True)
            assert out.kind is Outcome.SURVIVED
            np.testing.assert_array_equal(out.trace, np.zeros((51, g.n_bits)))


class TestAgainstNaiveReference:
    """The kernel (two-smallest-magnitudes check update, exclusion sums in
    adjacency order) must match the literal update rules bit for bit."""

    def _compare(self, g, h, n_max):
        kind, k, trace = naive_decode(g, h, n_max)
        out = decode(g, h, n_max, capture_trace=True)
        assert out.kind.value == kind
        assert out.iteration == k
        assert len(trace) == out.trace.shape[0]
        for row, expected in zip(out.trace, trace):
            np.testing.assert_array_equal(row, expected)

    def test_random_inputs_on_toy(self, toy):
        rng = np.random.default_rng(17)
        for _ in range(40):
            self._compare(toy, rng.normal(size=4) * rng.uniform(0.1, 5), 12)

    def test_random_inputs_on_random_graphs(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            g = random_graph(rng)
            self._compare(g, rng.normal(size=g.n_bits), 10)

    def test_inputs_with_exact_zeros(self, toy):
        rng = np.random.default_rng(23)
        for _ in range(20):
            h = rng.integers(-2, 3, size=4).astype(np.float64)
            self._compare(toy, h, 8)


class TestScalability:
    def test_power_of_two_scaling_preserves_everything(self, toy, tanner):
        # Scaling by 2^j is exact in binary floating point, so the trace
        # scales exactly and the sign pattern matches componentwise,
        # zeros included.
        rng = np.random.default_rng(29)
        for g in (toy, tanner):
            for _ in range(25):
                h = rng.normal(size=g.n_bits)
                lam = float(2.0 ** rng.integers(-3, 4))
                a = decode(g, h, 30, capture_trace=True)
                b = decode(g, lam * h, 30, capture_trace=True)
                assert a.kind is b.kind
                assert a.iteration == b.iteration
                np.testing.assert_array_equal(np.sign(a.trace), np.sign(b.trace))
                np.testing.assert_array_equal(lam * a.trace, b.trace)

    def test_continuous_scaling_preserves_outcome(self, toy, tanner):
        # Arbitrary positive factors round differently, which can leave a
        # ~1e-16 residue where the exact value cancels to 0; outcome kind
        # and stop iteration still agree, and signs agree away from such
        # cancellation residues.
        rng = np.random.default_rng(31)
        for g in (toy, tanner):
            for _ in range(25):
                h = rng.normal(size=g.n_bits)
                lam = float(np.exp(rng.uniform(-2, 2)))
                a = decode(g, h, 30, capture_trace=True)
                b = decode(g, lam * h, 30, capture_trace=True)
                assert a.kind is b.kind
                assert a.iteration == b.iteration
                scale = np.max(np.abs(a.trace), axis=1, keepdims=True)
                solid = np.minimum(np.abs(a.trace), np.abs(b.trace) / lam) > 1e-12 * scale
                np.testing.assert_array_equal(
                    np.sign(a.trace)[solid], np.sign(b.trace)[solid]
                )


class TestMonotonicity:
    def test_classification_consistent_across_caps(self, toy, tanner):
        rng = np.random.default_rng(37)
        for g in (toy, tanner):
            for _ in range(25):
                xi = rng.normal(loc=0.8, scale=0.5, size=g.n_bits)
                h = llr_from_noise(xi)
                hi = decode(g, h, 40)
                lo = decode(g, h, 15)
                if hi.kind is Outcome.DECODED_AT_INPUT:
                    assert lo.kind is Outcome.DECODED_AT_INPUT
                elif hi.kind in (Outcome.CORRECTED, Outcome.WRONG_CODEWORD) and hi.iteration <= 15:
                    assert lo.kind is hi.kind
                    assert lo.iteration == hi.iteration
                else:
                    assert lo.kind is Outcome.SURVIVED
                    assert lo.iteration == 15

    def test_error_set_membership_non_increasing(self, toy):
        # withstand(xi) >= n means xi still fails after n iterations; the
        # indicator must be non-increasing in n.
        rng = np.random.default_rng(41)
        for _ in range(30):
            xi = rng.normal(loc=0.9, scale=0.4, size=4)
            wc = withstand_count(toy, xi, 50)
            member = [
                (wc != IMMEDIATE_DECODE and wc >= n) for n in range(0, 51)
            ]
            assert all(a >= b for a, b in zip(member, member[1:]))


class TestNumericalContracts:
    def test_integer_inputs_stay_integer(self, toy):
        rng = np.random.default_rng(43)
        for _ in range(25):
            h = rng.integers(-9, 10, size=4).astype(np.float64)
            out = decode(toy, h, 25, capture_trace=True)
            assert np.array_equal(out.trace, np.trunc(out.trace))

    def test_bit_identical_repeat(self, tanner):
        rng = np.random.default_rng(47)
        xi = rng.normal(loc=0.9, scale=0.3, size=155)
        h = llr_from_noise(xi)
        a = decode(tanner, h, 60, capture_trace=True)
        b = decode(tanner, h, 60, capture_trace=True)
        assert a.kind is b.kind
        np.testing.assert_array_equal(a.trace, b.trace)

    def test_trace_rows_cover_every_iteration(self, toy):
        out = decode(toy, np.array([-0.5, 3.0, 3.0, 3.0]), 10, capture_trace=True)
        assert out.trace.shape == (out.iteration + 1, 4)

    def test_exact_path_matches_kernel_on_integer_inputs(self, toy):
        # Integer inputs are exact in both arithmetics, so the two paths
        # must agree bit for bit.
        rng = np.random.default_rng(53)
        for _ in range(15):
            h = rng.integers(-9, 10, size=4).astype(np.float64)
            a = decode(toy, h, 25, capture_trace=True)
            b = decode(toy, h, 25, capture_trace=True, exact=True)
            assert a.kind is b.kind
            assert a.iteration == b.iteration
            np.testing.assert_array_equal(a.trace, b.trace)


class TestTraceCsv:
    def test_header_and_roundtrip(self):
        trace = np.array([[1.0, -2.5], [0.25, 3.0]])
        text = trace_csv(trace)
        lines = text.strip().splitlines()
        assert lines[0] == "k,m_1,m_2"
        parsed = [[float(v) for v in line.split(",")[1:]] for line in lines[1:]]
        np.testing.assert_array_equal(np.array(parsed), trace)

    def test_withstand_property_values(self):
        assert DecodeOutcome(Outcome.CORRECTED, 5, 100).withstand == 4
        assert DecodeOutcome(Outcome.SURVIVED, 100, 100).withstand == 100
        assert math.isinf(DecodeOutcome(Outcome.WRONG_CODEWORD, 3, 100).withstand)
        assert DecodeOutcome(Outcome.DECODED_AT_INPUT, 0, 100).withstand == IMMEDIATE_DECODE
