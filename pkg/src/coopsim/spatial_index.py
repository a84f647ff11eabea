"""Fixed-radius neighbor queries over a point set, without materialized edges.

A flat uniform grid with cell size equal to the query radius.  On the cube
the cells are axis-aligned boxes of side ``radius`` (the last cell along
each axis absorbs the remainder, so every cell has side >= radius).  On the
sphere the cells are latitude bands of angular height ``radius``, each band
split into longitude sectors whose count shrinks toward the poles.

Internally the index is a CSR layout: ``ids_sorted`` holds all point ids
grouped by flat cell id (cells in increasing id order, points within a cell
in insertion order), and ``cell_start`` holds the group offsets.  Candidate
gathering for a query therefore reduces to a handful of contiguous slices,
which both the exact neighbor query and the epidemic's batched destination
sampler share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .geometry import Cube, PointSet, Sphere2, within_radius

# Widen sphere longitude windows by one ulp-scale margin so borderline
# candidates are never excluded before the exact distance filter.
_WINDOW_EPS = 1e-12


def _clamped_cells(coords: np.ndarray, cell_size: float, ncells: int) -> np.ndarray:
    c = np.floor(coords / cell_size).astype(np.int64)
    return np.clip(c, 0, ncells - 1)


@dataclass
class GridIndex:
    """Immutable fixed-radius grid over a PointSet (build once, query many)."""

    points: PointSet
    cell_size: float
    cell_ids: np.ndarray = field(repr=False)      # flat cell id per point
    ids_sorted: np.ndarray = field(repr=False)    # point ids grouped by cell
    cell_start: np.ndarray = field(repr=False)    # CSR offsets, len ncells+1
    # cube-only
    ncells_axis: int = 0
    strides: np.ndarray | None = None
    # sphere-only
    n_bands: int = 0
    band_lon_counts: np.ndarray | None = None
    band_offsets: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.points.size

    def cell_of(self, point_id: int) -> int:
        """Flat cell id of a point."""
        self._check_id(point_id)
        return int(self.cell_ids[point_id])

    def buckets(self) -> dict[int, list[int]]:
        """Cell id -> point ids in insertion order (debug/test view)."""
        out: dict[int, list[int]] = {}
        for cell in np.unique(self.cell_ids):
            lo, hi = self.cell_start[cell], self.cell_start[cell + 1]
            out[int(cell)] = [int(i) for i in self.ids_sorted[lo:hi]]
        return out

    def _check_id(self, point_id: int) -> None:
        if not 0 <= point_id < self.size:
            raise InvalidArgumentError(f"unknown point id {point_id}")

    # -- candidate gathering ------------------------------------------------

    def query_ranges(self, coords: np.ndarray) -> list[tuple[int, int]]:
        """Slices of ``ids_sorted`` that together cover every point within
        ``cell_size`` of ``coords`` (a superset; callers filter exactly)."""
        if isinstance(self.points.space, Cube):
            starts, stops = self._cube_ranges(coords.reshape(1, -1))
            return [(int(a), int(b)) for a, b in zip(starts[0], stops[0]) if a < b]
        return self._sphere_ranges_one(coords)

    def query_ranges_batch(self, point_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Candidate ranges for many stored points at once.

        Returns (starts, stops) of shape (m, R) into ``ids_sorted``; unused
        slots have start == stop.  Used by the epidemic destination sampler.
        """
        coords = self.points.positions[point_ids]
        if isinstance(self.points.space, Cube):
            return self._cube_ranges(coords)
        rows = [self._sphere_ranges_one(coords[i]) for i in range(len(point_ids))]
        width = max(1, max(len(r) for r in rows)) if rows else 1
        starts = np.zeros((len(rows), width), dtype=np.int64)
        stops = np.zeros((len(rows), width), dtype=np.int64)
        for i, row in enumerate(rows):
            for j, (a, b) in enumerate(row):
                starts[i, j] = a
                stops[i, j] = b
        return starts, stops

    def _cube_ranges(self, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n = coords.shape[1]
        nc = self.ncells_axis
        cells = _clamped_cells(coords, self.cell_size, nc)
        lo_last = np.maximum(cells[:, -1] - 1, 0)
        hi_last = np.minimum(cells[:, -1] + 1, nc - 1)
        combos = np.array(np.meshgrid(*([[-1, 0, 1]] * (n - 1)), indexing="ij")).reshape(
            n - 1, -1
        ).T if n > 1 else np.zeros((1, 0), dtype=np.int64)
        m = coords.shape[0]
        starts = np.zeros((m, len(combos)), dtype=np.int64)
        stops = np.zeros((m, len(combos)), dtype=np.int64)
        for j, off in enumerate(combos):
            lead = cells[:, :-1] + off
            valid = np.all((lead >= 0) & (lead < nc), axis=1)
            # clamp before indexing; invalid rows are masked out afterwards
            safe = np.clip(lead, 0, nc - 1)
            flat = safe @ self.strides[:-1] if n > 1 else np.zeros(m, dtype=np.int64)
            starts[:, j] = np.where(valid, self.cell_start[flat + lo_last], 0)
            stops[:, j] = np.where(valid, self.cell_start[flat + hi_last + 1], 0)
        return starts, stops

    def _sphere_ranges_one(self, coords: np.ndarray) -> list[tuple[int, int]]:
        r = self.cell_size
        theta = math.acos(min(1.0, max(-1.0, float(coords[2]))))
        lam = math.atan2(float(coords[1]), float(coords[0])) % (2.0 * math.pi)
        band = min(int(theta // r), self.n_bands - 1)
        if theta <= r or theta >= math.pi - r:
            window = math.pi  # cap contains a pole: all longitudes qualify
        else:
            window = math.asin(min(1.0, math.sin(r) / math.sin(theta))) + _WINDOW_EPS
        ranges: list[tuple[int, int]] = []
        for b in (band - 1, band, band + 1):
            if not 0 <= b < self.n_bands:
                continue
            nlon = int(self.band_lon_counts[b])
            base = int(self.band_offsets[b])
            if window >= math.pi:
                ranges.append((int(self.cell_start[base]), int(self.cell_start[base + nlon])))
                continue
            w = 2.0 * math.pi / nlon
            j_lo = math.floor((lam - window) / w)
            j_hi = math.floor((lam + window) / w)
            if j_hi - j_lo + 1 >= nlon:
                ranges.append((int(self.cell_start[base]), int(self.cell_start[base + nlon])))
                continue
            j_lo %= nlon
            j_hi %= nlon
            if j_lo <= j_hi:
                ranges.append(
                    (int(self.cell_start[base + j_lo]), int(self.cell_start[base + j_hi + 1]))
                )
            else:  # wraps past longitude 0
                ranges.append((int(self.cell_start[base + j_lo]), int(self.cell_start[base + nlon])))
                ranges.append((int(self.cell_start[base]), int(self.cell_start[base + j_hi + 1])))
        return ranges


def build_index(points: PointSet, radius: float) -> GridIndex:
    """Bucket every point of ``points`` into a grid with cell size ``radius``."""
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    space = points.space
    if isinstance(space, Sphere2) and radius >= math.pi / 2:
        raise InvalidArgumentError("sphere index requires radius < pi/2")
    pos = points.positions

    if isinstance(space, Cube):
        n = space.dimension
        nc = max(1, int(1.0 // radius))
        strides = nc ** np.arange(n - 1, -1, -1, dtype=np.int64)
        cells = _clamped_cells(pos, radius, nc) if points.size else np.zeros((0, n), dtype=np.int64)
        cell_ids = cells @ strides
        ncells_total = nc**n
        extra = dict(ncells_axis=nc, strides=strides)
    else:
        n_bands = max(1, int(math.pi // radius))
        edges_lo = np.arange(n_bands) * radius
        edges_hi = np.append(edges_lo[1:], math.pi)
        # widest sine inside each band sets its sector count
        sin_max = np.where(
            (edges_lo <= math.pi / 2) & (edges_hi >= math.pi / 2),
            1.0,
            np.maximum(np.sin(edges_lo), np.sin(edges_hi)),
        )
        band_lon_counts = np.maximum(1, (2.0 * math.pi * sin_max // radius).astype(np.int64))
        band_offsets = np.concatenate([[0], np.cumsum(band_lon_counts)])
        if points.size:
            theta = np.arccos(np.clip(pos[:, 2], -1.0, 1.0))
            lam = np.arctan2(pos[:, 1], pos[:, 0]) % (2.0 * math.pi)
            band = np.minimum((theta // radius).astype(np.int64), n_bands - 1)
            widths = 2.0 * math.pi / band_lon_counts[band]
            lon = np.minimum((lam // widths).astype(np.int64), band_lon_counts[band] - 1)
            cell_ids = band_offsets[band] + lon
        else:
            cell_ids = np.zeros(0, dtype=np.int64)
        ncells_total = int(band_offsets[-1])
        extra = dict(
            n_bands=n_bands, band_lon_counts=band_lon_counts, band_offsets=band_offsets
        )

    order = np.argsort(cell_ids, kind="stable").astype(np.int64)
    counts = np.bincount(cell_ids, minlength=ncells_total)
    cell_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return GridIndex(
        points=points,
        cell_size=float(radius),
        cell_ids=cell_ids,
        ids_sorted=order,
        cell_start=cell_start,
        **extra,
    )


def candidate_ids(index: GridIndex, coords: np.ndarray) -> np.ndarray:
    """All point ids in cells adjacent to ``coords`` (superset of its neighbors)."""
    ranges = index.query_ranges(np.asarray(coords, dtype=float))
    if not ranges:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([index.ids_sorted[a:b] for a, b in ranges])


def neighbors_within(index: GridIndex, point_id: int, radius: float) -> np.ndarray:
    """Exactly the ids at distance <= radius of ``point_id`` (self excluded).

    ``radius`` must equal the index cell size; the grid was built for it.
    """
    index._check_id(point_id)
    if not math.isclose(radius, index.cell_size, rel_tol=1e-12, abs_tol=0.0):
        raise InvalidArgumentError(
            f"query radius {radius} does not match index cell size {index.cell_size}"
        )
    q = index.points.positions[point_id]
    cand = candidate_ids(index, q)
    keep = within_radius(index.points.space, index.points.positions[cand], q, radius)
    out = cand[keep]
    return out[out != point_id]
