# sif/spectrum.py
"""
Eigenvalues of the sifting operators by three routes.

The dense route materializes the N^2 x N^2 matrix and is kept as an oracle.
The block-circulant route diagonalizes longitude shifts with a DFT: for every
frequency k the operator restricts to the N x N latitude block
H_k[j, q] = sum_t band(t, j - q)[j] exp(-2 pi i t k / N).
"""

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Iterable, Literal, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg, stats
from scipy.spatial import cKDTree

from sif.conic_filter import FilterSpec
from sif.glt_symbol import symbol_eig_approx
from sif.grid import make_grid
from sif.operator import SiftOperator, build_approx_Op, build_exact_B, to_dense
from sif.utils.config import get_settings
from sif.utils.errors import ResourceLimitError
from sif.utils.logger import get_logger

logger = get_logger(__name__)

Method = Literal["dense", "block_circulant", "glt_symbol"]
Form = Literal["B", "I-B", "BtB", "I-BtB"]
FORMS = ("B", "I-B", "BtB", "I-BtB")
SORT_CONVENTION = "real ascending, ties by imaginary ascending"


class SpectrumReport(BaseModel):
    """Sorted eigenvalues with the parameters that produced them."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: Method
    N: int
    R: float
    m: float
    form: Form = "B"
    kind: Optional[str] = None
    eigenvalues: np.ndarray = Field(description="Complex eigenvalues sorted by (real, imag).")
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def min_real(self) -> float:
        return float(self.eigenvalues.real.min())


def sort_spectrum(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise ValueError(f"unknown operator form {form!r}; expected one of {FORMS}")


def _report(op: SiftOperator, method: Method, form: Form, eigs: np.ndarray, started: float, **extra) -> SpectrumReport:
    metadata = {
        "quad_level": op.quad_level,
        "seconds": round(time.perf_counter() - started, 6),
        "sort": SORT_CONVENTION,
        **extra,
    }
    return SpectrumReport(
        method=method,
        N=op.gridspec.N,
        R=op.filter.R,
        m=op.filter.cells(op.gridspec),
        form=form,
        kind=op.kind,
        eigenvalues=sort_spectrum(eigs),
        metadata=metadata,
    )


def eig_dense(op: SiftOperator, form: Form = "B", dense_cap: Optional[int] = None) -> SpectrumReport:
    """All N^2 eigenvalues from the dense matrix (oracle route)."""
    _check_form(form)
    cap = dense_cap or get_settings().spectrum.dense_cap
    N = op.gridspec.N
    if N > cap:
        raise ResourceLimitError(
            f"dense eigensolve of a {N * N} x {N * N} matrix exceeds dense_cap={cap}; "
            "use the block-circulant route"
        )
    started = time.perf_counter()
    B = to_dense(op)
    if form in ("BtB", "I-BtB"):
        gram = B.T @ B
        eigs = linalg.eigvalsh(gram).astype(complex)
    else:
        eigs = linalg.eigvals(B)
    if form.startswith("I-"):
        eigs = 1.0 - eigs
    return _report(op, "dense", form, eigs, started)


def latitude_blocks(op: SiftOperator) -> np.ndarray:
    """The N latitude blocks H_k stacked as an (N, N, N) complex array [k, j, q]."""
    N = op.gridspec.N
    spectra = op.longitude_spectra()
    blocks = np.zeros((N, N, N), dtype=complex)
    j = np.arange(N)
    for idx, s in enumerate(op.s_values):
        q = j - int(s)
        valid = (q >= 0) & (q < N)
        blocks[:, j[valid], q[valid]] = spectra[idx][:, j[valid]]
    return blocks


def _block_eigs(block: np.ndarray, form: str) -> np.ndarray:
    if form in ("BtB", "I-BtB"):
        eigs = linalg.eigvalsh(block.conj().T @ block).astype(complex)
    else:
        eigs = linalg.eigvals(block)
    return 1.0 - eigs if form.startswith("I-") else eigs


def eig_block_circulant(
    op: SiftOperator,
    form: Form = "B",
    threads: Optional[int] = None,
    force: bool = False,
    block_cap: Optional[int] = None,
) -> SpectrumReport:
    """
    Union of the spectra of the N latitude blocks.

    Blocks are solved independently (optionally on a thread pool) and merged
    in frequency order before sorting, so the result does not depend on
    scheduling.
    """
    _check_form(form)
    settings = get_settings()
    cap = block_cap or settings.spectrum.block_cap
    threads = threads or settings.operator.threads
    N = op.gridspec.N
    if N > cap:
        if not force:
            raise ResourceLimitError(
                f"block-circulant spectrum for N={N} exceeds block_cap={cap}; pass force to override"
            )
        message = f"forcing block-circulant spectrum at N={N} (cap {cap}); expect long runtimes"
        logger.warning(message)
        warnings.warn(message, RuntimeWarning)
    started = time.perf_counter()
    blocks = latitude_blocks(op)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_eigs(b, form), blocks))
    else:
        parts = [_block_eigs(b, form) for b in blocks]
    report = _report(op, "block_circulant", form, np.concatenate(parts), started)
    logger.info(
        f"Block-circulant spectrum N={N} form={form}: min real part {report.min_real:.6g} "
        f"({report.metadata['seconds']:.2f}s)"
    )
    return report


def eig_symbol(N: int, m: float, oversample: Optional[int] = None) -> SpectrumReport:
    oversample = oversample or get_settings().spectrum.oversample
    started = time.perf_counter()
    eigs = symbol_eig_approx(N, m, oversample)
    return SpectrumReport(
        method="glt_symbol",
        N=N,
        R=m * math.pi / N,
        m=m,
        eigenvalues=sort_spectrum(eigs),
        metadata={
            "oversample": oversample,
            "seconds": round(time.perf_counter() - started, 6),
            "sort": SORT_CONVENTION,
        },
    )


def singular_values(op: SiftOperator) -> np.ndarray:
    """All N^2 singular values, ascending, from the latitude blocks."""
    values = [linalg.svdvals(block) for block in latitude_blocks(op)]
    return np.sort(np.concatenate(values))


def frobenius_norm_sq(op: SiftOperator) -> float:
    """||op||_F^2; every stored (t, s, j) entry occurs once per longitude index."""
    return float(op.gridspec.N * np.sum(op.kernel ** 2))


def conjugate_pairing_defect(eigs: np.ndarray) -> float:
    """Largest distance from conj(lambda) to the nearest eigenvalue."""
    eigs = np.asarray(eigs, dtype=complex)
    tree = cKDTree(np.column_stack([eigs.real, eigs.imag]))
    distances, _ = tree.query(np.column_stack([eigs.real, -eigs.imag]))
    return float(np.max(distances))


def ks_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Sup distance between the empirical CDFs of the real parts."""
    return float(stats.ks_2samp(np.real(a), np.real(b)).statistic)


class SpectrumComparison(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    table: pd.DataFrame
    reports: Dict[str, SpectrumReport]

    @property
    def zoom(self) -> pd.DataFrame:
        """Lowest 20% of the sorted indices."""
        return self.table.iloc[: max(1, int(math.ceil(0.2 * len(self.table))))]


def _filter_for(gridspec, radius: Optional[float], m: Optional[float]) -> FilterSpec:
    if (radius is None) == (m is None):
        raise ValueError("give exactly one of radius or m")
    return FilterSpec.from_radius(radius) if radius is not None else FilterSpec.from_cells(m, gridspec)


def spectrum_compare(
    N: int,
    radius: Optional[float] = None,
    m: Optional[float] = None,
    quad_level: Optional[int] = None,
    force: bool = False,
) -> SpectrumComparison:
    """
    Sorted real parts of Exact_B, Approx_Op and the symbol quantiles, aligned by index 1..N^2.
    """
    gridspec = make_grid(N)
    filter = _filter_for(gridspec, radius, m)
    exact = eig_block_circulant(build_exact_B(gridspec, filter, quad_level), force=force)
    approx = eig_block_circulant(build_approx_Op(gridspec, filter), force=force)
    glt = eig_symbol(N, filter.cells(gridspec))
    table = pd.DataFrame(
        {
            "index": np.arange(1, N * N + 1),
            "exactB_re": np.sort(exact.eigenvalues.real),
            "op_re": np.sort(approx.eigenvalues.real),
            "symbol_re": np.sort(glt.eigenvalues.real),
        }
    )
    return SpectrumComparison(table=table, reports={"exact": exact, "approx": approx, "symbol": glt})


def zero_distribution_check(
    R_fixed: float, N_list: Iterable[int], eps_list: Sequence[float] = (0.1, 0.01)
) -> pd.DataFrame:
    """
    Frobenius norms and eigenvalue counts of Op at a radius that does not shrink with N.

    Columns: N, m, frobenius_sq, and count_gt_<eps> / fraction_gt_<eps> per eps.
    """
    filter = FilterSpec.from_radius(R_fixed)
    rows = []
    for N in N_list:
        gridspec = make_grid(N)
        op = build_approx_Op(gridspec, filter)
        magnitudes = np.abs(eig_block_circulant(op).eigenvalues)
        row = {"N": N, "m": R_fixed / gridspec.h, "frobenius_sq": frobenius_norm_sq(op)}
        for eps in eps_list:
            count = int(np.sum(magnitudes > eps))
            row[f"count_gt_{eps:g}"] = count
            row[f"fraction_gt_{eps:g}"] = count / (N * N)
        rows.append(row)
        logger.info(f"Zero-distribution check N={N}: {row}")
    return pd.DataFrame(rows)
