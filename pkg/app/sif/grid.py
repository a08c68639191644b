# sif/grid.py
"""Equiangular latitude-longitude grid on the unit sphere.

Cell (i, j), 1 <= i, j <= N, spans longitudes [2(i-1)h, 2ih] and latitudes
[-pi/2 + (j-1)h, -pi/2 + jh] with h = pi/N. Areas are normalized so the whole
sphere has measure 1.
"""

import math
from functools import cached_property
from typing import Iterator, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from sif.utils.errors import GridIndexError, InvalidGridError

TWO_PI = 2.0 * math.pi


class GridPoint(BaseModel):
    """A point on the sphere in (longitude, latitude) radians."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(description="Longitude in [0, 2*pi).")
    phi: float = Field(description="Latitude in [-pi/2, pi/2].")

    @field_validator("theta")
    @classmethod
    def _check_theta(cls, value: float) -> float:
        if not 0.0 <= value < TWO_PI:
            raise ValueError(f"theta={value} outside [0, 2*pi)")
        return value

    @field_validator("phi")
    @classmethod
    def _check_phi(cls, value: float) -> float:
        if not -math.pi / 2 <= value <= math.pi / 2:
            raise ValueError(f"phi={value} outside [-pi/2, pi/2]")
        return value


class Cell(BaseModel):
    model_config = ConfigDict(frozen=True)

    i: int
    j: int
    theta_range: Tuple[float, float]
    phi_range: Tuple[float, float]

    @property
    def center(self) -> GridPoint:
        return GridPoint(
            theta=0.5 * (self.theta_range[0] + self.theta_range[1]),
            phi=0.5 * (self.phi_range[0] + self.phi_range[1]),
        )


class GridSpec(BaseModel):
    """
    The N x N grid. Immutable; array accessors are cached.

    Arrays indexed by latitude use 0-based position j-1; signal arrays are laid
    out as values[i-1, j-1].
    """

    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=2, description="Points per axis.")

    @property
    def h(self) -> float:
        return math.pi / self.N

    @cached_property
    def theta_centers(self) -> np.ndarray:
        return (2 * np.arange(1, self.N + 1) - 1) * self.h

    @cached_property
    def phi_centers(self) -> np.ndarray:
        return -math.pi / 2 + (np.arange(1, self.N + 1) - 0.5) * self.h

    @cached_property
    def cell_areas(self) -> np.ndarray:
        """Normalized area of one cell in each latitude row."""
        j = np.arange(1, self.N + 1)
        return (self.h / math.pi) * np.sin((j - 0.5) * self.h) * math.sin(self.h / 2)

    @cached_property
    def area_weights(self) -> np.ndarray:
        """N x N array of cell areas, broadcast along longitude."""
        return np.broadcast_to(self.cell_areas, (self.N, self.N))

    def center(self, i: int, j: int) -> GridPoint:
        _check_index(self, i, "i")
        _check_index(self, j, "j")
        return GridPoint(theta=float(self.theta_centers[i - 1]), phi=float(self.phi_centers[j - 1]))

    def cell(self, i: int, j: int) -> Cell:
        _check_index(self, i, "i")
        _check_index(self, j, "j")
        h = self.h
        return Cell(
            i=i,
            j=j,
            theta_range=(2 * (i - 1) * h, 2 * i * h),
            phi_range=(-math.pi / 2 + (j - 1) * h, -math.pi / 2 + j * h),
        )

    def centers(self) -> Iterator[GridPoint]:
        for i in range(1, self.N + 1):
            for j in range(1, self.N + 1):
                yield self.center(i, j)

    def cells(self) -> Iterator[Cell]:
        for i in range(1, self.N + 1):
            for j in range(1, self.N + 1):
                yield self.cell(i, j)


def _check_index(spec: GridSpec, index: int, name: str) -> None:
    if not 1 <= index <= spec.N:
        raise GridIndexError(f"{name}={index} outside 1..{spec.N}")


def make_grid(N: int) -> GridSpec:
    """
    Build the N x N grid of cell centers z_ij = ((2i-1)h, -pi/2 + (j-1/2)h).

    Args:
        N (int): Points per axis, at least 2.

    Returns:
        GridSpec: The immutable grid description.

    Raises:
        InvalidGridError: If N < 2.
    """
    if int(N) != N or N < 2:
        raise InvalidGridError(f"grid needs N >= 2, got {N}")
    return GridSpec(N=int(N))


def cell_area(spec: GridSpec, j: int) -> float:
    """
    Exact normalized area (h/2pi)(cos((j-1)h) - cos(jh)).

    Evaluated as (h/pi) sin((j-1/2)h) sin(h/2), the same quantity without the
    cancellation of the cosine difference.
    """
    _check_index(spec, j, "j")
    return float(spec.cell_areas[j - 1])


def cell_area_leading(spec: GridSpec, j: int) -> float:
    _check_index(spec, j, "j")
    return spec.h ** 2 * math.sin(j * spec.h) / TWO_PI


def great_circle(theta_a, phi_a, theta_b, phi_b):
    """
    Vectorized great-circle distance in radians.

    Numerator and denominator of the atan2 are the sine and cosine of the
    central angle; the cosine is the usual spherical-law dot product. This
    gives exactly 0 for coincident points, where arccos of a clamped dot
    product is only accurate to ~1e-8.
    """
    dtheta = np.mod(np.subtract(theta_a, theta_b), TWO_PI)
    sin_a, cos_a = np.sin(phi_a), np.cos(phi_a)
    sin_b, cos_b = np.sin(phi_b), np.cos(phi_b)
    cos_dt = np.cos(dtheta)
    dot = sin_a * sin_b + cos_a * cos_b * cos_dt
    cross = np.hypot(cos_b * np.sin(dtheta), cos_a * sin_b - sin_a * cos_b * cos_dt)
    return np.arctan2(cross, np.clip(dot, -1.0, 1.0))


def arc_distance(p: GridPoint, q: GridPoint) -> float:
    """Great-circle distance between two points, in [0, pi]."""
    return float(great_circle(p.theta, p.phi, q.theta, q.phi))


def approx_distance(spec: GridSpec, j: int, t: int, s: int) -> float:
    """Leading-order distance h*sqrt(s^2 + 4 t^2 sin^2(jh)) between z_ij and z_{i-t, j-s}."""
    _check_index(spec, j, "j")
    _check_index(spec, j - s, "j-s")
    return spec.h * math.sqrt(s * s + 4 * t * t * math.sin(j * spec.h) ** 2)


def cell_diameter(spec: GridSpec, j: int) -> float:
    """Distance between the opposite corners v_ij = (2(i-1)h, -pi/2+(j-1)h) and u_ij = (2ih, -pi/2+jh)."""
    _check_index(spec, j, "j")
    h = spec.h
    return float(great_circle(0.0, -math.pi / 2 + (j - 1) * h, 2 * h, -math.pi / 2 + j * h))


def cell_diameter_leading(spec: GridSpec, j: int) -> float:
    _check_index(spec, j, "j")
    return spec.h * math.sqrt(1 + 4 * math.sin(j * spec.h) ** 2)


class GridSummary(BaseModel):
    """What `grid-info` reports: the step, the total normalized area and the cell extremes."""

    model_config = ConfigDict(frozen=True)

    N: int
    h: float
    total_area: float
    min_cell_area: float
    max_cell_area: float
    max_cell_diameter: float


def grid_summary(spec: GridSpec) -> GridSummary:
    diameters = [cell_diameter(spec, j) for j in range(1, spec.N + 1)]
    areas = spec.cell_areas
    return GridSummary(
        N=spec.N,
        h=spec.h,
        total_area=float(spec.N * areas.sum()),
        min_cell_area=float(areas.min()),
        max_cell_area=float(areas.max()),
        max_cell_diameter=max(diameters),
    )
