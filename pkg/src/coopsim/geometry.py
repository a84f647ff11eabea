"""Metric spaces and Poisson point sampling.

Two ambient spaces are supported: the unit cube ``[0,1]^n`` under the
maximum metric, and the unit 2-sphere embedded in 3-space under the
geodesic (great-circle) metric.  Host locations are drawn from a
homogeneous Poisson process: the point count is Poisson(intensity) and
positions are i.i.d. uniform on the space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

_UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Cube:
    """The cube [0,1]^n with the maximum metric."""

    dimension: int

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidArgumentError(f"cube dimension must be >= 1, got {self.dimension}")

    @property
    def coord_dim(self) -> int:
        return self.dimension


@dataclass(frozen=True)
class Sphere2:
    """The unit 2-sphere in R^3 with the geodesic metric arccos(x . y)."""

    @property
    def coord_dim(self) -> int:
        return 3


SpaceSpec = Cube | Sphere2


@dataclass
class PointSet:
    """A realization of a Poisson process on a space.

    ``positions`` is a (size, coord_dim) float64 array; point ids are the
    dense row indices 0..size-1.
    """

    space: SpaceSpec
    positions: np.ndarray
    intensity: float

    @property
    def size(self) -> int:
        return self.positions.shape[0]


def center(space: SpaceSpec) -> np.ndarray:
    """Reference point used to seed infections: cube midpoint, or the sphere pole (0,0,1)."""
    if isinstance(space, Cube):
        return np.full(space.dimension, 0.5)
    return np.array([0.0, 0.0, 1.0])


def _check_point(space: SpaceSpec, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (space.coord_dim,):
        raise InvalidArgumentError(
            f"point of shape {p.shape} does not fit space with coord_dim {space.coord_dim}"
        )
    return p


def distance(space: SpaceSpec, p: np.ndarray, q: np.ndarray) -> float:
    """Distance between two points: max-metric on the cube, arccos(p . q) on the sphere."""
    p = _check_point(space, p)
    q = _check_point(space, q)
    if isinstance(space, Cube):
        return float(np.max(np.abs(p - q)))
    return float(np.arccos(np.clip(np.dot(p, q), -1.0, 1.0)))


def distance_to_many(space: SpaceSpec, points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized distances from each row of ``points`` to ``q``."""
    if isinstance(space, Cube):
        return np.max(np.abs(points - q), axis=1)
    return np.arccos(np.clip(points @ q, -1.0, 1.0))


def within_radius(space: SpaceSpec, points: np.ndarray, q: np.ndarray, radius: float) -> np.ndarray:
    """Boolean mask: which rows of ``points`` lie in the closed ball of ``radius`` around ``q``."""
    if isinstance(space, Cube):
        return np.max(np.abs(points - q), axis=1) <= radius
    return np.arccos(np.clip(points @ q, -1.0, 1.0)) <= radius


def sphere_point_from_uniforms(u1, u2) -> np.ndarray:
    """Map uniforms (u1, u2) on [0,1) to a uniform point on the unit sphere.

    Polar angles are theta = 2*pi*u1 (longitude) and phi = arccos(1 - 2*u2)
    (colatitude); Cartesian coordinates follow by the standard transformation.
    Accepts scalars or equal-length arrays.
    """
    theta = 2.0 * np.pi * np.asarray(u1, dtype=float)
    phi = np.arccos(1.0 - 2.0 * np.asarray(u2, dtype=float))
    sin_phi = np.sin(phi)
    return np.stack(
        [sin_phi * np.cos(theta), sin_phi * np.sin(theta), np.cos(phi)], axis=-1
    )


def sample_point_set(space: SpaceSpec, intensity: float, rng: np.random.Generator) -> PointSet:
    """Sample a Poisson(intensity) number of i.i.d. uniform points on the space."""
    if not intensity > 0:
        raise InvalidArgumentError(f"intensity must be positive, got {intensity}")
    count = int(rng.poisson(intensity))
    if isinstance(space, Cube):
        positions = rng.random((count, space.dimension))
    else:
        u = rng.random((count, 2))
        positions = sphere_point_from_uniforms(u[:, 0], u[:, 1])
        if count == 0:
            positions = positions.reshape(0, 3)
    return PointSet(space=space, positions=positions, intensity=float(intensity))


def validate_point_set(points: PointSet) -> None:
    """Raise if positions violate the space invariants (cube range / unit norm)."""
    pos = points.positions
    if isinstance(points.space, Cube):
        if pos.size and (pos.min() < 0.0 or pos.max() > 1.0):
            raise InvalidArgumentError("cube coordinates must lie in [0,1]")
    else:
        if pos.size:
            norms = np.einsum("ij,ij->i", pos, pos)
            if np.max(np.abs(norms - 1.0)) >= _UNIT_NORM_TOL:
                raise InvalidArgumentError("sphere points must be unit vectors")
