# sif/line_if.py
"""
Discrete Iterative Filtering on periodic 1D signals.

The moving average is a circulant matrix F whose first row holds the
normalized filter samples. For filters built as a self-convolution the DFT of
the row is real and in [0, 1], and (I - F)^m g converges to the part of g
living on frequencies where that DFT vanishes.
"""

import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg, signal

from sif.sifting_graph import iterate_sifting, run_decomposition
from sif.utils.errors import InvalidFilterError, NoOscillationError
from sif.utils.logger import get_logger
from sif.utils.state import ImfDiagnostics

logger = get_logger(__name__)

ZERO_RESPONSE_TOL = 1e-12


class CirculantFilter:
    """
    Hermitian circulant moving average.

    Args:
        n (int): Signal length.
        first_row (np.ndarray): Nonnegative, symmetric (row[k] == row[n-k]), sums to 1.
        support (int): Nonzero samples on each side of the centre.
    """

    def __init__(self, n: int, first_row: np.ndarray, support: int):
        self.n = n
        self.first_row = first_row
        self.support = support

    @property
    def response(self) -> np.ndarray:
        """DFT of the first row: the eigenvalues of F, real for symmetric rows."""
        return np.fft.fft(self.first_row).real

    def matrix(self) -> np.ndarray:
        # scipy's circulant takes the first column; the row is symmetric so they coincide
        return linalg.circulant(self.first_row)

    def apply(self, g: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.fft(self.first_row) * np.fft.fft(g)).real

    def sift(self, g: np.ndarray) -> np.ndarray:
        """(I - F) g."""
        return g - self.apply(g)


def build_circulant(n: int, filter_samples: np.ndarray) -> CirculantFilter:
    """
    Circulant filter from centred samples w[-s..s] (odd length 2s+1).

    Raises:
        InvalidFilterError: Negative, asymmetric, empty or too wide samples
            (each side must stay below floor(n/6)).
    """
    w = np.asarray(filter_samples, dtype=float)
    if w.ndim != 1 or w.size % 2 != 1:
        raise InvalidFilterError("filter samples must be a 1D array of odd length")
    if np.any(w < 0):
        raise InvalidFilterError("filter samples must be nonnegative")
    if not np.allclose(w, w[::-1], rtol=0.0, atol=1e-15 * max(1.0, w.max())):
        raise InvalidFilterError("filter samples must be symmetric")
    total = w.sum()
    if total <= 0:
        raise InvalidFilterError("filter samples sum to zero")
    nonzero = np.flatnonzero(w)
    centre = w.size // 2
    support = int(np.max(np.abs(nonzero - centre)))
    if support >= n // 6:
        raise InvalidFilterError(
            f"filter support {support} per side does not fit n={n} (needs < {n // 6})"
        )
    row = np.zeros(n)
    offsets = np.arange(-support, support + 1)
    row[np.mod(offsets, n)] = w[centre - support: centre + support + 1] / total
    return CirculantFilter(n, row, support)


def double_convolution_filter(base: np.ndarray) -> np.ndarray:
    """conv(base, base), centred; symmetric whenever base is."""
    base = np.asarray(base, dtype=float)
    return np.convolve(base, base)


def box_filter(half_width: int) -> np.ndarray:
    return np.ones(2 * half_width + 1) / (2 * half_width + 1)


def filter_for_length(n: int, length: int) -> CirculantFilter:
    """Self-convolved box whose half-support is `length` samples (rounded down to even)."""
    half = max(1, length // 2)
    return build_circulant(n, double_convolution_filter(box_filter(half)))


def if_limit_imf(F: CirculantFilter, g: np.ndarray) -> np.ndarray:
    """
    lim_{m -> inf} (I - F)^m g, computed in the Fourier basis.

    Keeps the frequencies where the filter response is zero (to 1e-12) and
    drops all others. Only valid when the response lies in [0, 1]; a raw
    filter with negative response makes the powers diverge instead.

    Raises:
        InvalidFilterError: The response has a negative value.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (F.n,):
        raise ValueError(f"signal of length {g.size} does not match n={F.n}")
    lowest = float(F.response.min())
    if lowest < -ZERO_RESPONSE_TOL:
        raise InvalidFilterError(
            f"filter response reaches {lowest:.3g} < 0; the limit exists only for "
            "self-convolved filters, see double_convolution_filter"
        )
    keep = np.abs(F.response) <= ZERO_RESPONSE_TOL
    return np.fft.ifft(np.where(keep, np.fft.fft(g), 0.0)).real


def count_extrema_1d(g: np.ndarray) -> int:
    """Strict periodic maxima plus minima."""
    g = np.asarray(g, dtype=float)
    maxima = signal.argrelextrema(g, np.greater, mode="wrap")[0]
    minima = signal.argrelextrema(g, np.less, mode="wrap")[0]
    return int(maxima.size + minima.size)


def select_length(g: np.ndarray, chi: float = 1.6) -> int:
    """Half-support 2 * floor(chi * n / k) with k the extrema count."""
    extrema = count_extrema_1d(g)
    if extrema < 2:
        raise NoOscillationError(f"signal has {extrema} extrema, the length rule needs at least 2")
    return 2 * int(math.floor(chi * len(g) / extrema))


class LineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=1e-3, gt=0.0)
    max_inner_iterations: int = Field(default=200, ge=1)
    max_imfs: int = Field(default=8, ge=1)
    chi: float = Field(default=1.6, gt=0.0)
    fixed_length: Optional[int] = Field(default=None, ge=2, description="Half-support in samples.")
    energy_floor: float = Field(default=1e-12, ge=0.0)


class LineBackend:
    def __init__(self, config: LineConfig):
        self.config = config

    def _length(self, values: np.ndarray) -> int:
        if self.config.fixed_length is not None:
            return self.config.fixed_length
        return select_length(values, self.config.chi)

    def count_extrema(self, values: np.ndarray) -> int:
        return count_extrema_1d(values)

    def norm(self, values: np.ndarray) -> float:
        return float(np.linalg.norm(values))

    def precheck(self, values: np.ndarray) -> Optional[str]:
        length = self._length(values)
        if max(1, length // 2) * 2 >= len(values) // 6:
            logger.info(f"Filter half-support {length} too wide for n={len(values)}; stopping.")
            return "filter_too_wide"
        return None

    def extract(self, values: np.ndarray, index: int) -> Tuple[np.ndarray, ImfDiagnostics]:
        length = self._length(values)
        F = filter_for_length(len(values), length)
        imf, iterations, ratio, reason = iterate_sifting(
            F.sift, values, self.norm, self.config.delta, self.config.max_inner_iterations
        )
        diagnostics: ImfDiagnostics = {
            "index": index,
            "iterations": iterations,
            "radius": float(F.support),
            "stop_reason": reason,
            "final_ratio": float(ratio),
        }
        return imf, diagnostics


def dif_decompose(
    g: np.ndarray, config: Optional[LineConfig] = None
) -> Tuple[List[np.ndarray], np.ndarray, List[ImfDiagnostics]]:
    """Iterative Filtering of a periodic signal: returns (imfs, remainder, diagnostics)."""
    config = config or LineConfig()
    imfs, remainder, diagnostics, _ = run_decomposition(np.asarray(g, dtype=float), LineBackend(config))
    return imfs, remainder, diagnostics
