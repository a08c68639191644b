# sif/signal_synth.py
"""Synthetic circular waves, the two-wave test preset, and ground-truth error metrics."""

import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from sif.grid import GridPoint, GridSpec, great_circle
from sif.operator import SiftOperator, SphericalSignal, check_same_grid, sift, sift_stabilized

TAPER_FRACTION = 0.15


class WaveSpec(BaseModel):
    """amplitude * cos(angular_frequency * d(z, center)), tapered to 0 at support_radius."""

    model_config = ConfigDict(frozen=True)

    center: GridPoint
    angular_frequency: float = Field(gt=0.0, description="k in cos(k d), rad^-1.")
    amplitude: float = 1.0
    support_radius: Optional[float] = Field(
        default=None, gt=0.0, le=math.pi, description="Radians; None for an untapered wave."
    )
    taper_fraction: float = Field(
        default=TAPER_FRACTION, gt=0.0, le=1.0, description="Share of support_radius the cosine ramp spans."
    )


def _window(spec: WaveSpec, d):
    if spec.support_radius is None:
        return np.ones_like(d)
    S = spec.support_radius
    start = (1.0 - spec.taper_fraction) * S
    ramp = 0.5 * (1.0 + np.cos(math.pi * (d - start) / (S - start)))
    return np.where(d <= start, 1.0, np.where(d < S, ramp, 0.0))


def _wave(spec: WaveSpec, d):
    return spec.amplitude * np.cos(spec.angular_frequency * d) * _window(spec, d)


def wave_value(spec: WaveSpec, point: GridPoint) -> float:
    d = great_circle(spec.center.theta, spec.center.phi, point.theta, point.phi)
    return float(_wave(spec, np.asarray(d)))


def circular_wave(gridspec: GridSpec, spec: WaveSpec) -> SphericalSignal:
    d = great_circle(
        spec.center.theta,
        spec.center.phi,
        gridspec.theta_centers[:, None],
        gridspec.phi_centers[None, :],
    )
    return SphericalSignal(gridspec, _wave(spec, d))


# ramp over the outer half of each cap
PRESET_TAPER = 0.5

HIGH_WAVE = WaveSpec(
    center=GridPoint(theta=0.0, phi=math.pi / 2),
    angular_frequency=46.0,
    support_radius=math.pi / 3,
    taper_fraction=PRESET_TAPER,
)
LOW_WAVE = WaveSpec(
    center=GridPoint(theta=math.pi / 2, phi=0.0),
    angular_frequency=6.0,
    support_radius=math.pi / 3,
    taper_fraction=PRESET_TAPER,
)


def two_wave_preset(gridspec: GridSpec) -> Tuple[SphericalSignal, SphericalSignal, SphericalSignal]:
    """
    The canonical test signal and its two components (high, low).

    The fast wave sits on the north pole, the slow one on the equator; their
    caps overlap between latitudes 30 and 60 degrees, where both are ramping down.
    k = 46 puts the fast wave at the most negative response of a pi/20 cone on
    N = 100, so I - B amplifies it while I - B^T B keeps it.
    """
    high = circular_wave(gridspec, HIGH_WAVE)
    low = circular_wave(gridspec, LOW_WAVE)
    return high + low, high, low


def weighted_l2_error(a: SphericalSignal, b: SphericalSignal) -> float:
    check_same_grid(a.gridspec, b.gridspec)
    return (a - b).weighted_norm()


def error_map(a: SphericalSignal, b: SphericalSignal) -> pd.DataFrame:
    """Per-cell |a - b| with 1-based indices and cell-centre coordinates."""
    check_same_grid(a.gridspec, b.gridspec)
    gridspec = a.gridspec
    N = gridspec.N
    i, j = np.meshgrid(np.arange(1, N + 1), np.arange(1, N + 1), indexing="ij")
    return pd.DataFrame(
        {
            "i": i.ravel(),
            "j": j.ravel(),
            "theta": gridspec.theta_centers[i.ravel() - 1],
            "phi": gridspec.phi_centers[j.ravel() - 1],
            "abs_error": np.abs(a.values - b.values).ravel(),
        }
    )


class ErrorCurve(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    initial_error: float
    errors: List[float] = Field(description="Error after iterations 1..K.")
    best_iteration: int = Field(description="0 for the input itself.")
    best: SphericalSignal


def error_curve(
    g: SphericalSignal,
    ground_truth: SphericalSignal,
    op: SiftOperator,
    stabilized: bool,
    iterations: int,
) -> ErrorCurve:
    """Iterate (I - B) or (I - BᵀB) and record the L2 error against the ground truth."""
    check_same_grid(g.gridspec, ground_truth.gridspec)
    step = sift_stabilized if stabilized else sift
    current = g
    initial = weighted_l2_error(current, ground_truth)
    best, best_error, best_iteration = current, initial, 0
    errors = []
    for p in range(1, iterations + 1):
        current = step(op, current)
        err = weighted_l2_error(current, ground_truth)
        errors.append(err)
        if err < best_error:
            best, best_error, best_iteration = current, err, p
    return ErrorCurve(initial_error=initial, errors=errors, best_iteration=best_iteration, best=best)
