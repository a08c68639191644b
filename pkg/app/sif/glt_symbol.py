# sif/glt_symbol.py
"""
Spectral symbol of the approximate operator sequence with R = m*h fixed in cells.

kappa(x2, theta1, theta2) = sum_{t,s} a_ts(x2) exp(i (t theta1 + s theta2)),
a_ts(x2) = 6 sin(pi x2) (m - sqrt(s^2 + 4 t^2 sin^2(pi x2)))^+ / (m^3 pi).
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from sif.utils.logger import get_logger

logger = get_logger(__name__)


class SymbolSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: float = Field(gt=0.0, description="Filter radius in grid cells.")


class SymbolSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    x2: float = Field(ge=0.0, le=1.0)
    theta1: float = Field(ge=-math.pi, le=math.pi)
    theta2: float = Field(ge=-math.pi, le=math.pi)
    value: complex


def _sin_pi(x2):
    """sin(pi x2) on [0, 1], exactly zero at both ends."""
    x2 = np.asarray(x2, dtype=float)
    return np.sin(np.pi * np.minimum(x2, 1.0 - x2))


def a_ts(t, s, x2, m: float):
    """Diagonal function a_ts(x2); vectorized over t, s, x2."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    sx = _sin_pi(x2)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    radial = np.sqrt(s * s + 4.0 * t * t * sx * sx)
    value = 6.0 * sx * np.maximum(m - radial, 0.0) / (m ** 3 * math.pi)
    return float(value) if np.ndim(value) == 0 else value


def support_window(x2: float, m: float) -> Tuple[int, int]:
    """(T, S): a_ts vanishes for |t| > T or |s| > S. T is 0 where sin(pi x2) = 0."""
    sx = float(_sin_pi(x2))
    S = int(math.ceil(m))
    T = int(math.ceil(m / (2.0 * sx))) if sx > 0 else 0
    return T, S


def _coefficients(x2: float, m: float, widen: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    T, S = support_window(x2, m)
    T, S = T + widen, S + widen
    t = np.arange(-T, T + 1)
    s = np.arange(-S, S + 1)
    return t, s, a_ts(t[:, None], s[None, :], x2, m)


def symbol_lattice(x2: float, theta1, theta2, m: float, widen: int = 0) -> np.ndarray:
    """kappa(x2, theta1[a], theta2[b]) as a (len(theta1), len(theta2)) complex array."""
    theta1 = np.atleast_1d(np.asarray(theta1, dtype=float))
    theta2 = np.atleast_1d(np.asarray(theta2, dtype=float))
    if float(_sin_pi(x2)) == 0.0:
        return np.zeros((theta1.size, theta2.size), dtype=complex)
    t, s, coeffs = _coefficients(x2, m, widen)
    e1 = np.exp(1j * np.outer(theta1, t))
    e2 = np.exp(1j * np.outer(s, theta2))
    return e1 @ coeffs @ e2


def symbol(x2: float, theta1: float, theta2: float, m: float, widen: int = 0) -> complex:
    """Point evaluation of kappa; 0 where sin(pi x2) = 0."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    return complex(symbol_lattice(x2, theta1, theta2, m, widen)[0, 0])


def sample_symbol(spec: SymbolSpec, x2: float, theta1: float, theta2: float) -> SymbolSample:
    """Evaluate kappa at one validated point; out-of-range x2 or angles raise ValidationError."""
    point = SymbolSample(x2=x2, theta1=theta1, theta2=theta2, value=0j)
    return point.model_copy(update={"value": symbol(point.x2, point.theta1, point.theta2, spec.m)})


def symbol_eig_approx(N: int, m: float, oversample: int = 4) -> np.ndarray:
    """
    Approximate the N^2 eigenvalues of Op by quantiles of kappa.

    kappa is sampled at x2 = j/N (j = 1..N) and at L x L midpoints of
    [-pi, pi]^2 with L = ceil(sqrt(oversample * N)); samples are sorted by real
    part (ties by imaginary part) and N^2 equispaced order statistics returned.
    """
    if N < 2 or oversample < 1:
        raise ValueError(f"need N >= 2 and oversample >= 1, got N={N}, oversample={oversample}")
    L = int(math.ceil(math.sqrt(oversample * N)))
    theta = -math.pi + (np.arange(L) + 0.5) * (2 * math.pi / L)
    samples = np.concatenate(
        [symbol_lattice(j / N, theta, theta, m).ravel() for j in range(1, N + 1)]
    )
    order = np.lexsort((samples.imag, samples.real))
    total = samples.size
    picks = ((np.arange(N * N) + 0.5) * total / (N * N)).astype(int)
    logger.debug(f"Symbol quantiles N={N} m={m}: {total} lattice samples, L={L}.")
    return samples[order][picks]


def counterexample_limit(m: float = 2.0) -> float:
    """
    Limit of kappa(x2, (0, pi)) as x2 -> 0+.

    The t-sums become integrals: sum over |s| < m of (-1)^s * integral of
    (m - sqrt(s^2 + 4u^2))^+ du, which equals (m X - s^2 asinh(X/|s|)) / 2 with
    X = sqrt(m^2 - s^2). For m = 2 this is (3/2pi)(1 - sqrt(3) + asinh(sqrt(3))/2).
    """
    total = 0.0
    for s in range(-int(math.ceil(m)) + 1, int(math.ceil(m))):
        if abs(s) >= m:
            continue
        X = math.sqrt(m * m - s * s)
        integral = 0.5 * m * X if s == 0 else 0.5 * (m * X - s * s * math.asinh(X / abs(s)))
        total += (-1) ** abs(s) * integral
    return 6.0 * total / (m ** 3 * math.pi)


def counterexample_scan(
    m: float = 2.0, x2_grid: Optional[Sequence[float]] = None, resolution: int = 50
) -> pd.DataFrame:
    """
    kappa(x2, (0, pi)) on a descending x2 grid.

    The default grid is geometric from 0.5 down to 1e-4 with `resolution`
    points. Columns: x2, kappa_real, kappa_imag, negative. The limit value is
    attached as `frame.attrs["limit"]`.
    """
    if x2_grid is None:
        x2_grid = np.geomspace(0.5, 1e-4, resolution)
    x2_values = np.sort(np.asarray(x2_grid, dtype=float))[::-1]
    values = np.array([symbol(x2, 0.0, math.pi, m) for x2 in x2_values])
    frame = pd.DataFrame(
        {
            "x2": x2_values,
            "kappa_real": values.real,
            "kappa_imag": values.imag,
            "negative": values.real < 0,
        }
    )
    frame.attrs["limit"] = counterexample_limit(m)
    frame.attrs["m"] = m
    return frame
