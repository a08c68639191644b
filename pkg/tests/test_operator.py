import math
import unittest
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

import numpy as np
import pytest

from sif.conic_filter import FilterSpec, cone_profile, support_overlap
from sif.grid import great_circle, make_grid
from sif.operator import (
    SOURCE_REFINEMENT,
    SphericalSignal,
    apply,
    apply_transpose,
    build_approx_Op,
    build_exact_B,
    renormalized,
    row_sums,
    sift,
    sift_stabilized,
    to_dense,
)
from sif.utils.config import OperatorSettings, Settings
from sif.utils.errors import GridMismatchError, InvalidFilterError, ResourceLimitError


def _subcell(i, j, h, count, a, b):
    """Midpoint and exact normalized area of subcell (a, b) of cell (i, j) split count x count."""
    lower = -math.pi / 2 + (j - 1) * h + b * h / count
    upper = lower + h / count
    theta = 2 * (i - 1) * h + (a + 0.5) * 2 * h / count
    weight = (math.sin(upper) - math.sin(lower)) * (2 * h / count) / (4 * math.pi)
    return theta, 0.5 * (lower + upper), weight


def _brute_force_entry(grid, filter, Q, i, j, p, q):
    """One Exact_B entry by explicit loops over all Q^2 x (rQ)^2 subcell pairs."""
    h = grid.h
    rQ = SOURCE_REFINEMENT * Q
    total = 0.0
    for a1 in range(Q):
        for b1 in range(Q):
            th_r, ph_r, w_r = _subcell(i, j, h, Q, a1, b1)
            for a2 in range(rQ):
                for b2 in range(rQ):
                    th_w, ph_w, w_w = _subcell(p, q, h, rQ, a2, b2)
                    d = great_circle(th_r, ph_r, th_w, ph_w)
                    total += w_r * w_w * float(cone_profile(filter, d))
    return total / grid.cell_areas[j - 1]


def _padded_kernel(op, s_max):
    """The operator's bands embedded in a kernel with s_max latitude offsets on each side."""
    out = np.zeros((2 * s_max + 1,) + op.kernel.shape[1:])
    out[s_max - op.s_max : s_max + op.s_max + 1] = op.kernel
    return out


class TestSphericalSignal(unittest.TestCase):

    def test_shape_and_finiteness(self):
        """Test that signals must match the grid and be finite."""
        grid = make_grid(4)
        with self.assertRaises(GridMismatchError):
            SphericalSignal(grid, np.zeros((4, 5)))
        values = np.zeros((4, 4))
        values[1, 1] = np.nan
        with self.assertRaises(ValueError):
            SphericalSignal(grid, values)

    def test_weighted_norm_of_ones(self):
        """Test that the area-weighted norm of the constant 1 is 1."""
        grid = make_grid(12)
        self.assertAlmostEqual(SphericalSignal(grid, np.ones((12, 12))).weighted_norm(), 1.0, places=13)


class TestOperators(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = make_grid(8)
        cls.filter = FilterSpec.from_radius(0.5)
        cls.approx = build_approx_Op(cls.grid, cls.filter)
        cls.exact = build_exact_B(cls.grid, cls.filter, quad_points_per_axis=3)
        rng = np.random.default_rng(7)
        cls.g = SphericalSignal(cls.grid, rng.standard_normal((8, 8)))

    def test_apply_matches_dense(self):
        """Test that the banded FFT product equals the dense matrix-vector product."""
        for op in (self.approx, self.exact):
            dense = to_dense(op)
            expected = dense @ self.g.values.ravel()
            np.testing.assert_allclose(apply(op, self.g).values.ravel(), expected, rtol=0, atol=1e-13)

    def test_apply_transpose_matches_dense(self):
        """Test that the transpose product equals the dense transpose."""
        for op in (self.approx, self.exact):
            expected = to_dense(op).T @ self.g.values.ravel()
            np.testing.assert_allclose(
                apply_transpose(op, self.g).values.ravel(), expected, rtol=0, atol=1e-13
            )

    def test_sift_steps(self):
        """Test (I - B)g and (I - BᵀB)g against the dense matrix."""
        dense = to_dense(self.exact)
        x = self.g.values.ravel()
        np.testing.assert_allclose(sift(self.exact, self.g).values.ravel(), x - dense @ x, atol=1e-13)
        np.testing.assert_allclose(
            sift_stabilized(self.exact, self.g).values.ravel(), x - dense.T @ (dense @ x), atol=1e-13
        )

    def test_approx_entries(self):
        """Test that every kept Approx_Op entry is sigma_q * f(d(z_ij, z_pq))."""
        N = self.grid.N
        for j in range(1, N + 1):
            for q in range(1, N + 1):
                for i in (1, 4):
                    for p in range(1, N + 1):
                        s, t = j - q, (i - p) % N
                        entry = self.approx.entry(i, j, p, q)
                        a, b = self.grid.center(i, j), self.grid.center(p, q)
                        value = self.grid.cell_areas[q - 1] * float(
                            cone_profile(self.filter, great_circle(a.theta, a.phi, b.theta, b.phi))
                        )
                        if support_overlap(self.filter, self.grid, j, t, s):
                            self.assertAlmostEqual(entry, value, delta=1e-14)
                        else:
                            self.assertEqual(entry, 0.0)

    def test_exact_entries_match_explicit_quadrature(self):
        """Test the collapsed subcell quadrature against the Q^4 explicit loop."""
        for (i, j, p, q) in [(1, 4, 1, 4), (1, 4, 2, 5), (3, 1, 8, 2), (5, 8, 1, 7)]:
            expected = _brute_force_entry(self.grid, self.filter, 3, i, j, p, q)
            self.assertAlmostEqual(self.exact.entry(i, j, p, q), expected, delta=1e-13)

    def test_nonnegative(self):
        """Test that both operators have nonnegative entries."""
        self.assertGreaterEqual(self.approx.kernel.min(), 0.0)
        self.assertGreaterEqual(self.exact.kernel.min(), 0.0)

    def test_exact_row_sums_improve_with_quadrature(self):
        """Test that Exact_B rows sum to one up to a quadrature error that shrinks with Q."""
        coarse = np.max(np.abs(row_sums(build_exact_B(self.grid, self.filter, 2)) - 1))
        fine = np.max(np.abs(row_sums(build_exact_B(self.grid, self.filter, 8)) - 1))
        self.assertLess(fine, coarse)
        self.assertLessEqual(fine, 1e-2)

    def test_exact_row_sums_small_grids(self):
        """Test that Exact_B rows at R = pi/10 and Q = 8 sum to one within 1e-3 on N = 8 and 16."""
        filter = FilterSpec.from_radius(math.pi / 10)
        for N in (8, 16):
            sums = row_sums(build_exact_B(make_grid(N), filter, 8))
            self.assertLessEqual(np.max(np.abs(sums - 1)), 1e-3, msg=f"N={N}")

    def test_renormalized(self):
        """Test that renormalization makes every row sum exactly one."""
        op = renormalized(self.exact)
        np.testing.assert_allclose(row_sums(op), 1.0, atol=1e-14)
        self.assertTrue(op.renormalized)
        flagged = build_exact_B(self.grid, self.filter, 3, renormalize=True)
        np.testing.assert_allclose(flagged.kernel, op.kernel, atol=1e-16)

    def test_threads_do_not_change_result(self):
        """Test that threaded assembly is identical to sequential assembly."""
        threaded = build_approx_Op(self.grid, self.filter, threads=3)
        np.testing.assert_array_equal(threaded.kernel, self.approx.kernel)
        threaded = build_exact_B(self.grid, self.filter, 3, threads=2)
        np.testing.assert_array_equal(threaded.kernel, self.exact.kernel)

    def test_dense_entries_are_longitude_invariant(self):
        """Test that entries with the same longitude offset (i - p) mod N agree exactly."""
        N = self.grid.N
        dense = to_dense(self.exact)
        rng = np.random.default_rng(21)
        for i, j, p, q, shift in rng.integers(1, N + 1, size=(100, 5)):
            i2, p2 = (i + shift - 1) % N + 1, (p + shift - 1) % N + 1
            row, col = (i - 1) * N + (j - 1), (p - 1) * N + (q - 1)
            row2, col2 = (i2 - 1) * N + (j - 1), (p2 - 1) * N + (q - 1)
            self.assertEqual(dense[row, col], dense[row2, col2])

    def test_spectra_are_filled_at_construction(self):
        """Test that the longitude spectra exist before the first apply and match the kernel's FFT."""
        op = build_approx_Op(self.grid, self.filter)
        np.testing.assert_array_equal(op.longitude_spectra(), np.fft.fft(op.kernel, axis=1))
        np.testing.assert_array_equal(op._rfft_cache, np.fft.rfft(op.kernel, axis=1))

    def test_concurrent_apply_matches_sequential(self):
        """Test that threads sharing one operator get the sequential results."""
        rng = np.random.default_rng(13)
        signals = [SphericalSignal(self.grid, rng.standard_normal((8, 8))) for _ in range(16)]
        op = build_exact_B(self.grid, self.filter, 3)
        expected = [sift_stabilized(op, g).values for g in signals]
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(lambda g: sift_stabilized(op, g).values, signals))
        for got, want in zip(results, expected):
            np.testing.assert_array_equal(got, want)

    def test_approx_row_sums_converge(self):
        """Test that the Approx_Op row-sum deviation at least shrinks by 1.5 per doubling of N."""
        filter = FilterSpec.from_radius(math.pi / 5)
        deviations = [np.max(np.abs(row_sums(build_approx_Op(make_grid(N), filter)) - 1)) for N in (20, 40, 80)]
        self.assertGreaterEqual(deviations[0] / deviations[1], 1.5)
        self.assertGreaterEqual(deviations[1] / deviations[2], 1.5)

    @pytest.mark.slow
    def test_exact_and_approx_differ_by_h_cubed(self):
        """Test that max |B - Op| over the bands scales like h^3 between N = 50 and N = 100."""
        filter = FilterSpec.from_radius(math.pi / 10)
        constants = []
        for N in (50, 100):
            grid = make_grid(N)
            exact, approx = build_exact_B(grid, filter, 8), build_approx_Op(grid, filter)
            s_max = max(exact.s_max, approx.s_max)
            gap = np.max(np.abs(_padded_kernel(exact, s_max) - _padded_kernel(approx, s_max)))
            constants.append(gap / grid.h ** 3)
        self.assertLess(constants[0] / constants[1], 2.0)
        self.assertGreater(constants[0] / constants[1], 0.5)

    def test_kernel_is_read_only(self):
        """Test that assembled operators cannot be modified in place."""
        with self.assertRaises(ValueError):
            self.approx.kernel[0, 0, 0] = 1.0

    def test_grid_mismatch(self):
        """Test that applying to a signal on another grid fails."""
        other = SphericalSignal(make_grid(6), np.ones((6, 6)))
        with self.assertRaises(GridMismatchError):
            apply(self.approx, other)

    def test_radius_precondition(self):
        """Test that assembly refuses R >= pi/2."""
        with self.assertRaises(InvalidFilterError):
            build_approx_Op(self.grid, FilterSpec.from_radius(math.pi / 2))
        with self.assertRaises(InvalidFilterError):
            build_exact_B(self.grid, FilterSpec.from_radius(2.0), 2)

    def test_quadrature_budget(self):
        """Test that Exact_B refuses a quadrature that exceeds max_quad_elements."""
        tight = Settings(operator=OperatorSettings(max_quad_elements=100))
        with patch("sif.operator.get_settings", return_value=tight):
            with self.assertRaises(ResourceLimitError):
                build_exact_B(self.grid, self.filter, 4)

    def test_constant_is_nearly_fixed(self):
        """Test that averaging the constant signal returns (almost) the constant."""
        ones = SphericalSignal(self.grid, np.ones((8, 8)))
        result = apply(renormalized(self.exact), ones)
        np.testing.assert_allclose(result.values, 1.0, atol=1e-13)


if __name__ == "__main__":
    unittest.main()
