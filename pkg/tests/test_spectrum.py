import math
import unittest
import warnings

import numpy as np
from scipy import linalg

from sif.conic_filter import FilterSpec
from sif.grid import make_grid
from sif.operator import build_approx_Op, build_exact_B, to_dense
from sif.spectrum import (
    FORMS,
    conjugate_pairing_defect,
    eig_block_circulant,
    eig_dense,
    eig_symbol,
    frobenius_norm_sq,
    ks_gap,
    latitude_blocks,
    singular_values,
    sort_spectrum,
    spectrum_compare,
    zero_distribution_check,
)
from sif.utils.errors import ResourceLimitError


class TestSpectrum(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = make_grid(6)
        cls.filter = FilterSpec.from_radius(0.7)
        cls.approx = build_approx_Op(cls.grid, cls.filter)
        cls.exact = build_exact_B(cls.grid, cls.filter, 3)

    def test_sort_spectrum(self):
        """Test ordering by real part with ties broken by the imaginary part."""
        values = sort_spectrum(np.array([1 + 1j, -2 + 0j, 1 - 1j, 0.5 + 0j]))
        np.testing.assert_array_equal(values, [-2, 0.5, 1 - 1j, 1 + 1j])

    def test_block_matches_dense(self):
        """Test that the latitude blocks reproduce the dense spectrum in every form."""
        for op in (self.approx, self.exact):
            for form in FORMS:
                dense = eig_dense(op, form).eigenvalues
                block = eig_block_circulant(op, form).eigenvalues
                self.assertEqual(block.size, 36)
                np.testing.assert_allclose(np.sort(block.real), np.sort(dense.real), atol=1e-10)
                np.testing.assert_allclose(np.sort(block.imag), np.sort(dense.imag), atol=1e-10)

    def test_blocks_reassemble_operator(self):
        """Test that B restricted to longitude frequency k is the k-th latitude block."""
        N = self.grid.N
        dense = to_dense(self.exact).reshape(N, N, N, N)
        blocks = latitude_blocks(self.exact)
        k = 2
        wave = np.exp(2j * math.pi * k * np.arange(N) / N)
        v = np.random.default_rng(3).standard_normal(N)
        g = wave[:, None] * v[None, :]
        Bg = np.einsum("ijpq,pq->ij", dense, g)
        np.testing.assert_allclose(Bg, wave[:, None] * (blocks[k] @ v)[None, :], atol=1e-13)

    def test_threaded_blocks(self):
        """Test that solving blocks on a pool does not change the result."""
        sequential = eig_block_circulant(self.exact, "B", threads=1).eigenvalues
        threaded = eig_block_circulant(self.exact, "B", threads=3).eigenvalues
        np.testing.assert_array_equal(sequential, threaded)

    def test_gram_forms_are_real_and_bounded(self):
        """Test that BᵀB eigenvalues are real and nonnegative, and I - BᵀB mirrors them."""
        gram = eig_block_circulant(self.exact, "BtB").eigenvalues
        self.assertTrue(np.all(gram.imag == 0))
        self.assertGreaterEqual(gram.real.min(), -1e-12)
        mirrored = eig_block_circulant(self.exact, "I-BtB").eigenvalues
        np.testing.assert_allclose(np.sort(mirrored.real), np.sort(1 - gram.real), atol=1e-13)

    def test_gram_upper_bound(self):
        """Test that BᵀB stays at or below (max row sum)(max column sum)."""
        B = to_dense(self.exact)
        bound = np.abs(B).sum(axis=1).max() * np.abs(B).sum(axis=0).max()
        gram = eig_block_circulant(self.exact, "BtB").eigenvalues
        self.assertLessEqual(gram.real.max(), bound + 1e-12)

    def test_conjugate_pairing(self):
        """Test that the spectrum of a real operator is closed under conjugation."""
        eigs = eig_block_circulant(self.approx).eigenvalues
        self.assertLess(conjugate_pairing_defect(eigs), 1e-10)
        self.assertGreater(conjugate_pairing_defect(np.array([1 + 1j, 2 + 0j])), 1.0)

    def test_frobenius_norm(self):
        """Test ||Op||_F^2 against the dense matrix."""
        for op in (self.approx, self.exact):
            self.assertAlmostEqual(frobenius_norm_sq(op), float(np.sum(to_dense(op) ** 2)), places=12)

    def test_singular_values(self):
        """Test block singular values against the dense SVD."""
        expected = np.sort(linalg.svdvals(to_dense(self.exact)))
        np.testing.assert_allclose(singular_values(self.exact), expected, atol=1e-12)

    def test_dense_cap(self):
        """Test that the dense route refuses grids above dense_cap."""
        with self.assertRaises(ResourceLimitError):
            eig_dense(self.approx, dense_cap=4)

    def test_block_cap_and_force(self):
        """Test that the block cap raises, and that force proceeds with a warning."""
        with self.assertRaises(ResourceLimitError):
            eig_block_circulant(self.approx, block_cap=4)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = eig_block_circulant(self.approx, block_cap=4, force=True)
        self.assertEqual(report.eigenvalues.size, 36)
        self.assertTrue(any(issubclass(w.category, RuntimeWarning) for w in caught))

    def test_unknown_form(self):
        """Test that an unknown operator form is refused."""
        with self.assertRaises(ValueError):
            eig_dense(self.approx, "B2")

    def test_report_metadata(self):
        """Test the report's parameters and sort convention."""
        report = eig_block_circulant(self.exact)
        self.assertEqual(report.method, "block_circulant")
        self.assertEqual(report.N, 6)
        self.assertEqual(report.kind, "exact")
        self.assertEqual(report.metadata["quad_level"], 3)
        self.assertAlmostEqual(report.m, 0.7 * 6 / math.pi, places=12)
        self.assertEqual(report.min_real, report.eigenvalues.real.min())

    def test_symbol_report(self):
        """Test that the symbol route returns N^2 sorted quantiles."""
        report = eig_symbol(6, 2.0, oversample=2)
        self.assertEqual(report.method, "glt_symbol")
        self.assertEqual(report.eigenvalues.size, 36)
        self.assertAlmostEqual(report.R, 2.0 * math.pi / 6, places=15)
        self.assertEqual(report.metadata["oversample"], 2)


class TestComparisons(unittest.TestCase):

    def test_ks_gap(self):
        """Test the CDF distance on identical and disjoint samples."""
        a = np.linspace(0, 1, 50)
        self.assertEqual(ks_gap(a, a), 0.0)
        self.assertEqual(ks_gap(a, a + 2.0), 1.0)

    def test_spectrum_compare(self):
        """Test the aligned comparison table and its zoom slice."""
        comparison = spectrum_compare(6, radius=0.7, quad_level=2)
        table = comparison.table
        self.assertEqual(list(table.columns), ["index", "exactB_re", "op_re", "symbol_re"])
        self.assertEqual(len(table), 36)
        self.assertEqual(table["index"].tolist(), list(range(1, 37)))
        for column in ("exactB_re", "op_re", "symbol_re"):
            self.assertTrue(table[column].is_monotonic_increasing)
        self.assertEqual(len(comparison.zoom), 8)
        self.assertEqual(set(comparison.reports), {"exact", "approx", "symbol"})

    def test_spectrum_compare_needs_one_radius(self):
        """Test that exactly one of radius and m must be given."""
        with self.assertRaises(ValueError):
            spectrum_compare(6)
        with self.assertRaises(ValueError):
            spectrum_compare(6, radius=0.5, m=1.0)

    def test_zero_distribution_columns(self):
        """Test the zero-distribution table at a fixed radius."""
        frame = zero_distribution_check(0.8, [6, 8], eps_list=(0.1,))
        self.assertEqual(
            list(frame.columns), ["N", "m", "frobenius_sq", "count_gt_0.1", "fraction_gt_0.1"]
        )
        self.assertEqual(frame["N"].tolist(), [6, 8])
        self.assertTrue(((frame["fraction_gt_0.1"] > 0) & (frame["fraction_gt_0.1"] <= 1)).all())
        self.assertAlmostEqual(frame["m"].iloc[1], 0.8 * 8 / math.pi, places=12)


if __name__ == "__main__":
    unittest.main()
