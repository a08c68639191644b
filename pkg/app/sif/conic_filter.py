# sif/conic_filter.py
"""Truncated-cone filter f(w) = 2 (R - d(center, w))^+ / (R - sin R), unit mass on the sphere."""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sif.grid import GridPoint, GridSpec, _check_index, great_circle
from sif.utils.errors import InvalidFilterError


def _r_minus_sin(R: float) -> float:
    if R < 1e-2:
        r2 = R * R
        return R * r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0))
    return R - math.sin(R)


class FilterSpec(BaseModel):
    """Cone radius R in radians, optionally pinned to the grid as R = m*h."""

    model_config = ConfigDict(frozen=True)

    R: float = Field(gt=0.0, lt=math.pi, description="Support radius in radians.")
    m: Optional[float] = Field(default=None, gt=0.0, description="Radius in cells when pinned to a grid.")

    @classmethod
    def from_radius(cls, R: float) -> "FilterSpec":
        if not 0.0 < R < math.pi:
            raise InvalidFilterError(f"filter radius must lie in (0, pi), got {R}")
        return cls(R=R)

    @classmethod
    def from_cells(cls, m: float, gridspec: GridSpec) -> "FilterSpec":
        if m <= 0:
            raise InvalidFilterError(f"filter radius in cells must be positive, got {m}")
        R = m * gridspec.h
        if R >= math.pi:
            raise InvalidFilterError(f"m={m} gives R={R} >= pi on N={gridspec.N}")
        return cls(R=R, m=m)

    @property
    def normalization(self) -> float:
        """C = (R - sin R) / 2."""
        return 0.5 * _r_minus_sin(self.R)

    @property
    def peak(self) -> float:
        return self.R / self.normalization

    def cells(self, gridspec: GridSpec) -> float:
        """Radius measured in grid steps."""
        return self.m if self.m is not None else self.R / gridspec.h


def cone_profile(spec: FilterSpec, d):
    """Filter value as a function of distance; accepts arrays."""
    return np.maximum(spec.R - np.asarray(d, dtype=float), 0.0) / spec.normalization


def filter_value(spec: FilterSpec, center: GridPoint, w: GridPoint) -> float:
    return float(cone_profile(spec, great_circle(center.theta, center.phi, w.theta, w.phi)))


def verify_unit_mass(spec: FilterSpec, quadrature_level: int) -> float:
    """
    Integrate the filter centred at the north pole against cos(phi) dtheta dphi / 4pi.

    Composite midpoint rule with 1024*level latitude and `level` longitude
    subintervals; the integrand does not depend on longitude for this centre.
    """
    if quadrature_level < 1:
        raise ValueError("quadrature_level must be >= 1")
    n_phi = 1024 * quadrature_level
    n_theta = quadrature_level
    dphi = math.pi / n_phi
    dtheta = 2 * math.pi / n_theta
    phi = -math.pi / 2 + (np.arange(n_phi) + 0.5) * dphi
    theta = (np.arange(n_theta) + 0.5) * dtheta
    d = great_circle(0.0, math.pi / 2, theta[:, None], phi[None, :])
    integrand = cone_profile(spec, d) * np.cos(phi)[None, :]
    return float(integrand.sum() * dtheta * dphi / (4 * math.pi))


def support_overlap(spec: FilterSpec, gridspec: GridSpec, j, t, s):
    """
    False where the entry ((i,j),(i-t,j-s)) is guaranteed to vanish.

    Tests 3m^2 > s^2 + sin(jh) sin((j-s)h) min(|t|, N-|t|)^2. Accepts scalars
    or broadcastable integer arrays; array inputs skip the index checks.
    """
    m = spec.cells(gridspec)
    h, N = gridspec.h, gridspec.N
    if np.isscalar(j) and np.isscalar(s):
        _check_index(gridspec, int(j), "j")
        _check_index(gridspec, int(j - s), "j-s")
    t_mod = np.mod(t, N)
    wrap = np.minimum(t_mod, N - t_mod)
    bound = np.asarray(s, dtype=float) ** 2 + np.sin(j * h) * np.sin((j - s) * h) * wrap.astype(float) ** 2
    result = 3 * m * m > bound - 1e-9
    return bool(result) if np.ndim(result) == 0 else result


def cells_may_interact(spec: FilterSpec, gridspec: GridSpec, center_distance):
    """
    Whether two cells can carry a nonzero double integral.

    Every point of a cell lies within 1.5h of its centre (h/2 in latitude,
    at most h along the parallel), so cells farther apart than R + 3h never interact.
    """
    return np.asarray(center_distance) < spec.R + 3.0 * gridspec.h
