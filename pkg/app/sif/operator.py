# sif/operator.py
"""
Moving-average operators on the sphere grid.

Both operators are invariant under longitude shifts, so an entry
((i,j),(p,q)) depends on i and p only through t = (i - p) mod N. They are
stored as a kernel array K[s + s_max, t, j-1] holding the entry
((i,j),(i-t, j-s)); s runs over -s_max..s_max.

Products are evaluated with a real FFT along longitude: for every latitude
offset s the t-sum is a circular convolution.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Literal, Optional, Tuple

import numpy as np

from sif.conic_filter import FilterSpec, cells_may_interact, cone_profile, support_overlap
from sif.grid import GridSpec, great_circle
from sif.utils.config import get_settings
from sif.utils.errors import (
    DegenerateSignalError,
    GridMismatchError,
    InvalidFilterError,
    ResourceLimitError,
)
from sif.utils.logger import get_logger

logger = get_logger(__name__)

OperatorKind = Literal["exact", "approx"]

# source cells of Exact_B are split this many times finer than target cells; odd
SOURCE_REFINEMENT = 3


class SphericalSignal:
    """Real samples on the grid cells, values[i-1, j-1] = g(z_ij)."""

    def __init__(self, gridspec: GridSpec, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (gridspec.N, gridspec.N):
            raise GridMismatchError(
                f"values of shape {values.shape} do not fit an N={gridspec.N} grid"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("signal values must be finite")
        self.gridspec = gridspec
        self.values = values

    def weighted_norm(self) -> float:
        """sqrt(sum sigma_ij g_ij^2)."""
        return float(np.sqrt(np.sum(self.gridspec.cell_areas[None, :] * self.values ** 2)))

    def like(self, values: np.ndarray) -> "SphericalSignal":
        return SphericalSignal(self.gridspec, values)

    def __add__(self, other: "SphericalSignal") -> "SphericalSignal":
        check_same_grid(self.gridspec, other.gridspec)
        return self.like(self.values + other.values)

    def __sub__(self, other: "SphericalSignal") -> "SphericalSignal":
        check_same_grid(self.gridspec, other.gridspec)
        return self.like(self.values - other.values)

    def __repr__(self) -> str:
        return f"SphericalSignal(N={self.gridspec.N}, norm={self.weighted_norm():.6g})"


def check_same_grid(a: GridSpec, b: GridSpec) -> None:
    if a.N != b.N:
        raise GridMismatchError(f"grid mismatch: N={a.N} vs N={b.N}")


class SiftOperator:
    """
    Banded, longitude-invariant N^2 x N^2 operator (Exact_B or Approx_Op).

    Args:
        gridspec (GridSpec): The grid the operator acts on.
        filter (FilterSpec): The cone the operator averages with.
        kind (str): "exact" for the double-integral matrix B, "approx" for Op.
        kernel (np.ndarray): Array of shape (2*s_max+1, N, N), see module docs.
        quad_level (int | None): Midpoint subdivisions used for "exact".
        renormalized (bool): Whether rows were rescaled to sum to 1.
    """

    def __init__(
        self,
        gridspec: GridSpec,
        filter: FilterSpec,
        kind: OperatorKind,
        kernel: np.ndarray,
        quad_level: Optional[int] = None,
        renormalized: bool = False,
    ):
        N = gridspec.N
        if kernel.ndim != 3 or kernel.shape[1:] != (N, N) or kernel.shape[0] % 2 != 1:
            raise GridMismatchError(f"kernel shape {kernel.shape} does not fit N={N}")
        self.gridspec = gridspec
        self.filter = filter
        self.kind = kind
        self.kernel = kernel
        self.kernel.setflags(write=False)
        self.quad_level = quad_level
        self.renormalized = renormalized
        # filled once here so concurrent apply/sift calls only read them
        self._spectra = np.fft.fft(kernel, axis=1)
        self._rfft_cache = np.fft.rfft(kernel, axis=1)

    @property
    def s_max(self) -> int:
        return (self.kernel.shape[0] - 1) // 2

    @property
    def s_values(self) -> np.ndarray:
        return np.arange(-self.s_max, self.s_max + 1)

    @property
    def bands(self) -> Dict[Tuple[int, int], np.ndarray]:
        """Nonzero bands keyed by (t mod N, s); each value is indexed by j-1."""
        out = {}
        for idx, s in enumerate(self.s_values):
            for t in range(self.gridspec.N):
                column = self.kernel[idx, t]
                if np.any(column != 0.0):
                    out[(t, int(s))] = column
        return out

    def entry(self, i: int, j: int, p: int, q: int) -> float:
        """Entry ((i,j),(p,q)) with 1-based indices."""
        s = j - q
        if abs(s) > self.s_max:
            return 0.0
        return float(self.kernel[s + self.s_max, (i - p) % self.gridspec.N, j - 1])

    def longitude_spectra(self) -> np.ndarray:
        """Full DFT of the kernel along t, shape (2*s_max+1, N, N): [s, k, j]."""
        return self._spectra

    def __repr__(self) -> str:
        return (
            f"SiftOperator(kind={self.kind!r}, N={self.gridspec.N}, R={self.filter.R:.6g}, "
            f"s_max={self.s_max}, quad_level={self.quad_level})"
        )


def _latitude_slices(N: int, s: int) -> Tuple[slice, slice]:
    """Rows j (0-based) with 0 <= j - s < N, and the matching source rows."""
    lo, hi = max(0, s), min(N, N + s)
    return slice(lo, hi), slice(lo - s, hi - s)


def _check_radius(filter: FilterSpec) -> None:
    if filter.R >= math.pi / 2:
        raise InvalidFilterError(f"operator assembly needs R < pi/2, got R={filter.R}")


def _assemble(gridspec: GridSpec, s_max: int, row_builder, threads: int) -> np.ndarray:
    N = gridspec.N
    kernel = np.zeros((2 * s_max + 1, N, N))
    rows = range(N)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(row_builder, rows))
    else:
        blocks = [row_builder(jj) for jj in rows]
    for jj, block in enumerate(blocks):
        kernel[:, :, jj] = block
    return kernel


def build_approx_Op(
    gridspec: GridSpec, filter: FilterSpec, threads: Optional[int] = None
) -> SiftOperator:
    """
    Assemble Op_{(i,j),(p,q)} = sigma(S_pq) * f_{z_ij}(z_pq).

    Latitude offsets are limited to |s| < sqrt(3) m and every entry outside
    `support_overlap` is dropped.
    """
    _check_radius(filter)
    threads = threads or get_settings().operator.threads
    N, h = gridspec.N, gridspec.h
    m = filter.cells(gridspec)
    s_max = min(int(math.ceil(math.sqrt(3.0) * m)) - 1, N - 1)
    s_vals = np.arange(-s_max, s_max + 1)
    t = np.arange(N)
    theta = gridspec.theta_centers
    phi = gridspec.phi_centers
    areas = gridspec.cell_areas

    def row(jj: int) -> np.ndarray:
        block = np.zeros((s_vals.size, N))
        j = jj + 1
        for idx, s in enumerate(s_vals):
            qq = jj - s
            if not 0 <= qq < N:
                continue
            d = great_circle(theta[0], phi[jj], theta[0] - 2 * t * h, phi[qq])
            values = areas[qq] * cone_profile(filter, d)
            values[~support_overlap(filter, gridspec, j, t, s)] = 0.0
            block[idx] = values
        return block

    started = time.perf_counter()
    kernel = _assemble(gridspec, s_max, row, threads)
    op = SiftOperator(gridspec, filter, "approx", kernel)
    logger.info(
        f"Assembled Approx_Op N={N} R={filter.R:.6g} m={m:.4g}: "
        f"{np.count_nonzero(kernel)} stored entries in {time.perf_counter() - started:.2f}s"
    )
    return op


def _sub_bands(phi_center: float, h: float, count: int) -> Tuple[np.ndarray, np.ndarray]:
    """Midpoint latitudes of `count` equal latitude bands of a cell and each band's
    exact area per unit longitude, normalized by 4*pi."""
    edges = phi_center - h / 2 + h * np.arange(count + 1) / count
    return 0.5 * (edges[:-1] + edges[1:]), np.diff(np.sin(edges)) / (4 * math.pi)


def _longitude_differences(Q: int, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct target-minus-source subcell longitude offsets, in units of
    2h/(rQ), with their multiplicities."""
    target = r * np.arange(Q) + (r - 1) // 2
    steps = np.subtract.outer(target, np.arange(r * Q)).ravel()
    values, counts = np.unique(steps, return_counts=True)
    return values, counts.astype(float)


def build_exact_B(
    gridspec: GridSpec,
    filter: FilterSpec,
    quad_points_per_axis: Optional[int] = None,
    renormalize: bool = False,
    threads: Optional[int] = None,
) -> SiftOperator:
    """
    Assemble B_{(i,j),(p,q)} = (1/sigma(S_ij)) * double integral of the cone over S_ij x S_pq.

    The target cell S_ij is split into Q x Q midpoint subcells and the source
    cell S_pq into rQ x rQ, r = SOURCE_REFINEMENT. Subcell weights are the exact
    areas of the subcells. Longitude offsets between target and source subcells
    take r(2Q-1) distinct values, so the subcell pairs collapse to
    Q x rQ x r(2Q-1) distances weighted by multiplicity.

    The row sum of B is the target-weighted mean of the source-side quadrature
    of the cone, which integrates to one exactly; only the source rule sets
    the row-sum error. With r odd every target midpoint is also a source
    midpoint, so the cone apex always sits at a source node.

    Parameters:
    ----------
    gridspec : GridSpec
        The grid.
    filter : FilterSpec
        Cone with R < pi/2.
    quad_points_per_axis : int, optional
        Q >= 2; defaults to the configured quad level.
    renormalize : bool
        Rescale each row to sum exactly 1.
    threads : int, optional
        Worker threads over latitude rows.

    Returns:
    -------
    SiftOperator
        The exact operator, kind "exact".
    """
    _check_radius(filter)
    settings = get_settings()
    Q = quad_points_per_axis or settings.operator.quad_level
    if Q < 2:
        raise ValueError(f"quad_points_per_axis must be >= 2, got {Q}")
    threads = threads or settings.operator.threads
    N, h = gridspec.N, gridspec.h
    r = SOURCE_REFINEMENT

    per_row = N * Q * (r * Q) * r * (2 * Q - 1)
    if per_row > settings.operator.max_quad_elements:
        raise ResourceLimitError(
            f"Exact_B with N={N}, Q={Q} needs {per_row} quadrature samples per block, "
            f"above max_quad_elements={settings.operator.max_quad_elements}; "
            "lower the quad level or raise the bound in config.json"
        )

    m = filter.cells(gridspec)
    s_max = min(int(math.ceil(m)), N - 1)
    s_vals = np.arange(-s_max, s_max + 1)
    t_all = np.arange(N)
    phi = gridspec.phi_centers
    areas = gridspec.cell_areas

    steps, multiplicity = _longitude_differences(Q, r)
    dtheta_sub = steps * (2 * h / (r * Q))

    def row(jj: int) -> np.ndarray:
        block = np.zeros((s_vals.size, N))
        lat_r, w_r = _sub_bands(phi[jj], h, Q)
        w_r = w_r * (2 * h / Q)
        for idx, s in enumerate(s_vals):
            qq = jj - s
            if not 0 <= qq < N:
                continue
            center_d = great_circle(0.0, phi[jj], -2 * t_all * h, phi[qq])
            candidates = t_all[cells_may_interact(filter, gridspec, center_d)]
            if candidates.size == 0:
                continue
            lat_w, w_w = _sub_bands(phi[qq], h, r * Q)
            w_w = w_w * (2 * h / (r * Q))
            # axes: (t, a_r, a_w, k)
            dtheta = 2 * candidates[:, None, None, None] * h + dtheta_sub[None, None, None, :]
            d = great_circle(
                dtheta, lat_r[None, :, None, None], 0.0, lat_w[None, None, :, None]
            )
            weights = w_r[:, None, None] * w_w[None, :, None] * multiplicity[None, None, :]
            integral = np.einsum("tabk,abk->t", cone_profile(filter, d), weights)
            block[idx, candidates] = integral / areas[jj]
        return block

    started = time.perf_counter()
    kernel = _assemble(gridspec, s_max, row, threads)
    op = SiftOperator(gridspec, filter, "exact", kernel, quad_level=Q)
    logger.info(
        f"Assembled Exact_B N={N} R={filter.R:.6g} Q={Q}: max |row sum - 1| = "
        f"{np.max(np.abs(row_sums(op) - 1)):.3e} in {time.perf_counter() - started:.2f}s"
    )
    if renormalize:
        op = renormalized(op)
    return op


def row_sums(op: SiftOperator) -> np.ndarray:
    """Row sums by latitude index (identical for every longitude)."""
    return op.kernel.sum(axis=(0, 1))


def renormalized(op: SiftOperator) -> SiftOperator:
    sums = row_sums(op)
    if np.any(sums <= 0):
        raise DegenerateSignalError("cannot renormalize an operator with an empty row")
    return SiftOperator(
        op.gridspec, op.filter, op.kind, op.kernel / sums[None, None, :], op.quad_level, renormalized=True
    )


def _values_of(op: SiftOperator, g) -> np.ndarray:
    if isinstance(g, SphericalSignal):
        check_same_grid(op.gridspec, g.gridspec)
        return g.values
    values = np.asarray(g, dtype=float)
    if values.shape != (op.gridspec.N, op.gridspec.N):
        raise GridMismatchError(f"array of shape {values.shape} does not fit N={op.gridspec.N}")
    return values


def _rfft_kernel(op: SiftOperator) -> np.ndarray:
    return op._rfft_cache


def _apply_values(op: SiftOperator, values: np.ndarray) -> np.ndarray:
    N = op.gridspec.N
    khat = _rfft_kernel(op)
    ghat = np.fft.rfft(values, axis=0)
    out = np.zeros_like(ghat)
    for idx, s in enumerate(op.s_values):
        rows, source = _latitude_slices(N, int(s))
        out[:, rows] += khat[idx, :, rows] * ghat[:, source]
    return np.fft.irfft(out, n=N, axis=0)


def _apply_transpose_values(op: SiftOperator, values: np.ndarray) -> np.ndarray:
    N = op.gridspec.N
    khat = _rfft_kernel(op)
    ghat = np.fft.rfft(values, axis=0)
    out = np.zeros_like(ghat)
    for idx, s in enumerate(op.s_values):
        # Bᵀ row q reads B's rows j = q + s
        rows, source = _latitude_slices(N, -int(s))
        out[:, rows] += np.conj(khat[idx, :, source]) * ghat[:, source]
    return np.fft.irfft(out, n=N, axis=0)


def apply(op: SiftOperator, g: SphericalSignal) -> SphericalSignal:
    """Moving average Bg: (Bg)_ij = sum_{t,s} band(t,s)[j] g_{(i-t) mod N, j-s}."""
    return SphericalSignal(op.gridspec, _apply_values(op, _values_of(op, g)))


def apply_transpose(op: SiftOperator, g: SphericalSignal) -> SphericalSignal:
    return SphericalSignal(op.gridspec, _apply_transpose_values(op, _values_of(op, g)))


def sift(op: SiftOperator, g: SphericalSignal) -> SphericalSignal:
    """(I - B) g."""
    values = _values_of(op, g)
    return SphericalSignal(op.gridspec, values - _apply_values(op, values))


def sift_stabilized(op: SiftOperator, g: SphericalSignal) -> SphericalSignal:
    """(I - BᵀB) g."""
    values = _values_of(op, g)
    return SphericalSignal(
        op.gridspec, values - _apply_transpose_values(op, _apply_values(op, values))
    )


def to_dense(op: SiftOperator) -> np.ndarray:
    """Dense N^2 x N^2 matrix; row/column index (i-1)*N + (j-1)."""
    N = op.gridspec.N
    dense = np.zeros((N, N, N, N))
    i = np.arange(N)
    for idx, s in enumerate(op.s_values):
        for jj in range(N):
            qq = jj - int(s)
            if not 0 <= qq < N:
                continue
            for t in range(N):
                dense[i, jj, (i - t) % N, qq] = op.kernel[idx, t, jj]
    return dense.reshape(N * N, N * N)
