# sif/decomposition.py
"""
Spherical Iterative Filtering.

Every IMF is the limit of g -> (I - BᵀB) g (or the naive g -> (I - B) g) for
an operator B built once from the residual; the outer loop runs in the
decomposition graph of `sif.sifting_graph`.
"""

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, Field

from sif.conic_filter import FilterSpec
from sif.operator import (
    SiftOperator,
    SphericalSignal,
    build_approx_Op,
    build_exact_B,
    check_same_grid,
    sift,
    sift_stabilized,
)
from sif.sifting_graph import iterate_sifting, run_decomposition
from sif.utils.config import get_settings
from sif.utils.errors import DegenerateSignalError, InvalidFilterError, NoOscillationError
from sif.utils.logger import get_logger
from sif.utils.state import ImfDiagnostics

logger = get_logger(__name__)


class FixedRadius(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: Literal["fixed"] = "fixed"
    R: float = Field(gt=0.0, lt=math.pi)


class ExtremaScaled(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: Literal["extrema_scaled"] = "extrema_scaled"
    chi: float = Field(default=1.6, gt=0.0)


RadiusRule = Annotated[Union[FixedRadius, ExtremaScaled], Field(discriminator="rule")]


class DecompositionConfig(BaseModel):
    """Parameters of one SIF run."""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=1e-3, gt=0.0, description="Stopping threshold on the relative change.")
    max_inner_iterations: int = Field(default=200, ge=1)
    max_imfs: int = Field(default=8, ge=1)
    radius_rule: RadiusRule = Field(default_factory=ExtremaScaled)
    stabilized: bool = Field(default=True, description="Iterate I - BᵀB instead of I - B.")
    kind: Literal["approx", "exact"] = "approx"
    quad_level: Optional[int] = Field(default=None, ge=2, description="Quadrature level for kind='exact'.")
    energy_floor: float = Field(default=1e-12, ge=0.0)

    @classmethod
    def from_settings(cls, **overrides) -> "DecompositionConfig":
        settings = get_settings().decomposition
        values = {
            "delta": settings.delta,
            "max_inner_iterations": settings.max_inner_iterations,
            "max_imfs": settings.max_imfs,
            "radius_rule": ExtremaScaled(chi=settings.chi),
            "energy_floor": settings.energy_floor,
        }
        values.update(overrides)
        return cls(**values)


class DecompositionResult:
    """IMFs, remainder and per-IMF diagnostics; input == sum(imfs) + remainder."""

    def __init__(
        self,
        imfs: List[SphericalSignal],
        remainder: SphericalSignal,
        diagnostics: List[ImfDiagnostics],
        finish_reason: Optional[str] = None,
    ):
        self.imfs = imfs
        self.remainder = remainder
        self.diagnostics = diagnostics
        self.finish_reason = finish_reason

    def reconstruction(self) -> SphericalSignal:
        total = self.remainder.values.copy()
        for imf in self.imfs:
            total = total + imf.values
        return self.remainder.like(total)

    def __repr__(self) -> str:
        return f"DecompositionResult(imfs={len(self.imfs)}, finish_reason={self.finish_reason!r})"


_NEIGHBOURS = np.ones((3, 3), dtype=bool)
_NEIGHBOURS[1, 1] = False


def _neighbourhood(values: np.ndarray, fill: float) -> np.ndarray:
    """(N, N, 8) neighbour values; longitude wraps, latitude rows stop at the poles."""
    padded = np.pad(values, ((1, 1), (0, 0)), mode="wrap")
    padded = np.pad(padded, ((0, 0), (1, 1)), mode="constant", constant_values=fill)
    return sliding_window_view(padded, (3, 3))[..., _NEIGHBOURS]


def _extrema_masks(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    upper = _neighbourhood(values, -np.inf).max(axis=-1)
    lower = _neighbourhood(values, np.inf).min(axis=-1)
    return values > upper, values < lower


def count_extrema(g: Union[SphericalSignal, np.ndarray]) -> int:
    """Strict local maxima plus strict minima over the 8-neighbourhood."""
    values = g.values if isinstance(g, SphericalSignal) else np.asarray(g, dtype=float)
    maxima, minima = _extrema_masks(values)
    return int(maxima.sum() + minima.sum())


def radius_bounds(gridspec) -> Tuple[float, float]:
    """[3h, pi/2 - h]; empty for N < 8 and a single point at N = 8."""
    h = gridspec.h
    return 3.0 * h, math.pi / 2 - h


def select_radius(g: SphericalSignal, config: DecompositionConfig) -> float:
    """
    Filter radius for the next IMF.

    extrema_scaled: R = chi * 2 * sqrt(4 pi / E), clamped to `radius_bounds`.
    Grids too coarse for that range raise InvalidFilterError.
    """
    rule = config.radius_rule
    if isinstance(rule, FixedRadius):
        return rule.R
    lower, upper = radius_bounds(g.gridspec)
    if lower > upper + 1e-12:
        raise InvalidFilterError(f"no admissible radius on an N={g.gridspec.N} grid: 3h > pi/2 - h")
    extrema = count_extrema(g)
    if extrema < 2:
        raise NoOscillationError(f"signal has {extrema} extrema, the radius rule needs at least 2")
    radius = rule.chi * 2.0 * math.sqrt(4.0 * math.pi / extrema)
    return float(min(max(radius, lower), upper))


def stopping_ratio(g_next: SphericalSignal, g_curr: SphericalSignal) -> float:
    """||g_next - g_curr|| / ||g_curr|| in the area-weighted norm."""
    check_same_grid(g_next.gridspec, g_curr.gridspec)
    denom = g_curr.weighted_norm()
    if denom == 0.0:
        raise DegenerateSignalError("stopping ratio of a zero signal")
    return (g_next - g_curr).weighted_norm() / denom


def build_operator(g: SphericalSignal, radius: float, config: DecompositionConfig) -> SiftOperator:
    filter = FilterSpec.from_radius(radius)
    if config.kind == "exact":
        return build_exact_B(g.gridspec, filter, config.quad_level)
    return build_approx_Op(g.gridspec, filter)


def extract_imf(
    g: SphericalSignal,
    config: DecompositionConfig,
    operator: Optional[SiftOperator] = None,
    index: int = 1,
) -> Tuple[SphericalSignal, ImfDiagnostics]:
    """
    Sift `g` until the stopping ratio reaches `config.delta` or the iteration cap.

    Args:
        g (SphericalSignal): The signal to sift.
        config (DecompositionConfig): Radius rule, operator kind, thresholds.
        operator (SiftOperator, optional): Use this operator instead of building one.
        index (int): Position of the IMF, reported in the diagnostics.

    Returns:
        tuple: The final iterate and its diagnostics. Reaching the cap is
        reported as stop_reason "iteration_cap", not raised.
    """
    if operator is None:
        operator = build_operator(g, select_radius(g, config), config)
    else:
        check_same_grid(operator.gridspec, g.gridspec)
    step = sift_stabilized if config.stabilized else sift
    gridspec = g.gridspec

    imf, iterations, ratio, reason = iterate_sifting(
        lambda values: step(operator, SphericalSignal(gridspec, values)).values,
        g.values,
        lambda values: SphericalSignal(gridspec, values).weighted_norm(),
        config.delta,
        config.max_inner_iterations,
    )
    diagnostics: ImfDiagnostics = {
        "index": index,
        "iterations": iterations,
        "radius": operator.filter.R,
        "stop_reason": reason,
        "final_ratio": float(ratio),
    }
    return SphericalSignal(gridspec, imf), diagnostics


class SphereBackend:
    """Adapts the sphere operations to the decomposition graph."""

    def __init__(self, gridspec, config: DecompositionConfig):
        self.gridspec = gridspec
        self.config = config

    def count_extrema(self, values: np.ndarray) -> int:
        return count_extrema(values)

    def norm(self, values: np.ndarray) -> float:
        return SphericalSignal(self.gridspec, values).weighted_norm()

    def precheck(self, values: np.ndarray) -> Optional[str]:
        if isinstance(self.config.radius_rule, FixedRadius):
            return None
        lower, upper = radius_bounds(self.gridspec)
        if lower > upper + 1e-12:
            logger.info(f"No admissible filter radius on an N={self.gridspec.N} grid; stopping.")
            return "filter_too_wide"
        return None

    def extract(self, values: np.ndarray, index: int) -> Tuple[np.ndarray, ImfDiagnostics]:
        imf, diagnostics = extract_imf(SphericalSignal(self.gridspec, values), self.config, index=index)
        return imf.values, diagnostics


def decompose(g: SphericalSignal, config: Optional[DecompositionConfig] = None) -> DecompositionResult:
    """Extract IMFs until the remainder has fewer than two extrema or max_imfs is reached."""
    config = config or DecompositionConfig.from_settings()
    backend = SphereBackend(g.gridspec, config)
    imfs, remainder, diagnostics, reason = run_decomposition(g.values, backend)
    return DecompositionResult(
        [SphericalSignal(g.gridspec, imf) for imf in imfs],
        SphericalSignal(g.gridspec, remainder),
        diagnostics,
        reason,
    )
