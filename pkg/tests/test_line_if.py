import math
import unittest

import numpy as np
from pydantic import ValidationError

from sif.line_if import (
    LineBackend,
    LineConfig,
    box_filter,
    build_circulant,
    count_extrema_1d,
    dif_decompose,
    double_convolution_filter,
    filter_for_length,
    if_limit_imf,
    select_length,
)
from sif.sifting_graph import run_decomposition
from sif.utils.errors import InvalidFilterError, NoOscillationError


def _cosine(n, periods, phase=0.0):
    return np.cos(2 * math.pi * periods * np.arange(n) / n + phase)


class TestCirculantFilter(unittest.TestCase):

    def test_build_normalizes_and_wraps(self):
        """Test that the first row holds the normalized samples around index 0."""
        F = build_circulant(12, np.array([1.0, 2.0, 1.0]))
        self.assertEqual(F.support, 1)
        self.assertAlmostEqual(F.first_row.sum(), 1.0, places=15)
        self.assertEqual((F.first_row[0], F.first_row[1], F.first_row[11]), (0.5, 0.25, 0.25))

    def test_build_rejects_bad_samples(self):
        """Test the preconditions on filter samples."""
        for samples in ([1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]):
            with self.assertRaises(InvalidFilterError, msg=str(samples)):
                build_circulant(60, np.array(samples))
        with self.assertRaises(InvalidFilterError):
            build_circulant(12, np.ones(5))

    def test_zero_padding_does_not_widen_support(self):
        """Test that zero tails are ignored when measuring the support."""
        F = build_circulant(12, np.array([0.0, 0.0, 1.0, 0.0, 0.0]))
        self.assertEqual(F.support, 0)
        self.assertEqual(F.first_row[0], 1.0)

    def test_matrix_apply_and_response(self):
        """Test that the FFT product, the dense matrix and the response agree."""
        F = filter_for_length(40, 4)
        g = np.random.default_rng(2).standard_normal(40)
        np.testing.assert_allclose(F.apply(g), F.matrix() @ g, atol=1e-14)
        np.testing.assert_allclose(F.sift(g), g - F.matrix() @ g, atol=1e-14)
        eigenvalues = np.sort(np.linalg.eigvalsh(F.matrix()))
        np.testing.assert_allclose(eigenvalues, np.sort(F.response), atol=1e-14)

    def test_self_convolution_response_in_unit_interval(self):
        """Test that a self-convolved filter has a response in [0, 1]."""
        F = filter_for_length(90, 6)
        self.assertGreaterEqual(F.response.min(), -1e-15)
        self.assertLessEqual(F.response.max(), 1.0 + 1e-15)

    def test_filter_shapes(self):
        """Test the box and double-convolution building blocks."""
        np.testing.assert_allclose(box_filter(2), np.full(5, 0.2))
        np.testing.assert_array_equal(double_convolution_filter(np.ones(3)), [1, 2, 3, 2, 1])
        self.assertEqual(filter_for_length(200, 7).support, 6)
        self.assertEqual(filter_for_length(200, 1).support, 2)


class TestIteratedLimit(unittest.TestCase):

    def test_limit_matches_matrix_power(self):
        """Test that (I - F)^m g approaches the projection onto the zeros of the response."""
        n = 64
        F = build_circulant(n, double_convolution_filter(np.array([0.5, 0.0, 0.5])))
        g = np.random.default_rng(9).standard_normal(n)
        powered = np.linalg.matrix_power(np.eye(n) - F.matrix(), 10_000) @ g
        np.testing.assert_allclose(powered, if_limit_imf(F, g), atol=1e-8)

    def test_limit_keeps_only_null_frequencies(self):
        """Test that the limit of a two-tone signal is the tone the filter annihilates."""
        n = 64
        F = build_circulant(n, double_convolution_filter(np.array([0.5, 0.0, 0.5])))
        kept = _cosine(n, 16)
        np.testing.assert_allclose(if_limit_imf(F, kept + _cosine(n, 3)), kept, atol=1e-12)

    def test_limit_refuses_raw_filters(self):
        """Test that a plain box, whose response dips below zero, has no limit to return."""
        F = build_circulant(64, box_filter(3))
        self.assertLess(F.response.min(), -0.2)
        with self.assertRaises(InvalidFilterError):
            if_limit_imf(F, _cosine(64, 5))

    def test_limit_length_mismatch(self):
        """Test that a signal of the wrong length is refused."""
        with self.assertRaises(ValueError):
            if_limit_imf(filter_for_length(60, 2), np.ones(59))


class TestLengthSelection(unittest.TestCase):

    def test_count_extrema(self):
        """Test periodic extrema counting."""
        self.assertEqual(count_extrema_1d(np.sin(2 * math.pi * 3 * np.arange(60) / 60)), 6)
        self.assertEqual(count_extrema_1d(np.ones(20)), 0)
        # the maximum sits on the wrap-around seam
        self.assertEqual(count_extrema_1d(np.array([3.0, 1.0, 0.0, 1.0])), 2)

    def test_select_length(self):
        """Test the half-support 2 * floor(chi * n / k)."""
        self.assertEqual(select_length(_cosine(200, 5)), 64)
        self.assertEqual(select_length(_cosine(200, 5), chi=1.0), 40)

    def test_select_length_needs_oscillation(self):
        """Test that a constant signal has no admissible length."""
        with self.assertRaises(NoOscillationError):
            select_length(np.ones(50))


class TestLineDecomposition(unittest.TestCase):

    def test_separates_two_tones(self):
        """Test that a fixed-length filter extracts the tone it annihilates."""
        n = 1125
        fast, slow = _cosine(n, 45), _cosine(n, 3, phase=0.3)
        config = LineConfig(fixed_length=24, max_imfs=1, delta=1e-3)
        imfs, remainder, diagnostics = dif_decompose(fast + slow, config)
        self.assertEqual(len(imfs), 1)
        np.testing.assert_allclose(imfs[0], fast, atol=1e-4)
        np.testing.assert_allclose(remainder, slow, atol=1e-4)
        self.assertEqual(diagnostics[0]["stop_reason"], "converged")
        self.assertEqual(diagnostics[0]["radius"], 24.0)

    def test_automatic_lengths_separate_two_tones(self):
        """Test that the extrema-based length rule splits two separated tones into two IMFs."""
        # n / 77 = 15 and n / 15 = 77 samples, so chi = 1 puts a response zero on each tone
        n = 1155
        fast, slow = _cosine(n, 77, phase=0.1), _cosine(n, 15, phase=0.3)
        imfs, remainder, diagnostics = dif_decompose(fast + slow, LineConfig(chi=1.0, max_imfs=2))
        self.assertEqual(len(imfs), 2)
        self.assertEqual([d["radius"] for d in diagnostics], [14.0, 76.0])
        self.assertLessEqual(np.max(np.abs(imfs[0] - fast)), 0.1)
        self.assertLessEqual(np.max(np.abs(imfs[1] - slow)), 0.1)
        self.assertLessEqual(np.max(np.abs(remainder)), 0.1)

    def test_filter_too_wide(self):
        """Test that a slow signal on a short line ends with filter_too_wide."""
        g = _cosine(120, 2)
        imfs, remainder, _, reason = run_decomposition(g, LineBackend(LineConfig()))
        self.assertEqual((imfs, reason), ([], "filter_too_wide"))
        np.testing.assert_array_equal(remainder, g)

    def test_reconstruction(self):
        """Test that components add back up to the input."""
        g = np.random.default_rng(4).standard_normal(300)
        imfs, remainder, diagnostics = dif_decompose(g, LineConfig(max_imfs=4, max_inner_iterations=50))
        self.assertGreaterEqual(len(imfs), 1)
        self.assertEqual(len(diagnostics), len(imfs))
        np.testing.assert_allclose(sum(imfs) + remainder, g, atol=1e-12)

    def test_config_validation(self):
        """Test that a fixed length below two is refused."""
        with self.assertRaises(ValidationError):
            LineConfig(fixed_length=1)


if __name__ == "__main__":
    unittest.main()
