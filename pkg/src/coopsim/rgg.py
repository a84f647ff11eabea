"""Random geometric graphs with implicit adjacency.

A graph is a Poisson point set plus a connection radius; two vertices are
adjacent when their distance is at most the radius (closed ball).  Edges are
never stored: adjacency is answered through the grid index.

Scaling: for intensity N and density exponent beta in (0,1), the cube radius
is ``0.5 * N**((beta-1)/n)`` which makes the expected interior degree
``(2r)^n * N = N**beta``.  On the unit sphere the radius is calibrated to the
same expected degree: a cap of geodesic radius r holds on average
``N * (1 - cos r) / 2`` points, so ``r = arccos(1 - 2 * N**(beta-1))``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGraphError, InvalidArgumentError
from .geometry import (
    Cube,
    PointSet,
    SpaceSpec,
    Sphere2,
    center,
    distance_to_many,
    sample_point_set,
)
from .spatial_index import GridIndex, build_index, neighbors_within

_BLOCK_LIMIT = 4_000_000  # max pairwise-block size for bulk degree counting


@dataclass(frozen=True)
class RggParams:
    """Derived scaling constants of one graph."""

    intensity: float
    beta: float
    dimension: int
    radius: float
    expected_degree: float


def derive_params(space: SpaceSpec, intensity: float, beta: float) -> RggParams:
    if not 0.0 < beta < 1.0:
        raise InvalidArgumentError(f"beta must lie in (0,1), got {beta}")
    if not intensity >= 1.0:
        raise InvalidArgumentError(f"intensity must be >= 1, got {intensity}")
    if isinstance(space, Cube):
        n = space.dimension
        radius = 0.5 * intensity ** ((beta - 1.0) / n)
        expected = (2.0 * radius) ** n * intensity
    else:
        n = 2
        radius = float(np.arccos(1.0 - 2.0 * intensity ** (beta - 1.0)))
        expected = intensity**beta
    return RggParams(
        intensity=float(intensity),
        beta=float(beta),
        dimension=n,
        radius=float(radius),
        expected_degree=float(expected),
    )


@dataclass
class GeometricGraph:
    points: PointSet
    params: RggParams
    index: GridIndex
    # 1-d fast path: positions projected and sorted once, so neighbor sets
    # become contiguous rank ranges
    sorted_x: np.ndarray | None = None
    order: np.ndarray | None = None  # rank -> point id
    rank: np.ndarray | None = None   # point id -> rank

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def space(self) -> SpaceSpec:
        return self.points.space


def assemble_graph(points: PointSet, params: RggParams) -> GeometricGraph:
    """Index a point set under the given parameters (tests build custom graphs here)."""
    index = build_index(points, params.radius)
    graph = GeometricGraph(points=points, params=params, index=index)
    if isinstance(points.space, Cube) and points.space.dimension == 1:
        x = points.positions[:, 0]
        order = np.argsort(x, kind="stable").astype(np.int64)
        graph.order = order
        graph.sorted_x = x[order]
        rank = np.empty(points.size, dtype=np.int64)
        rank[order] = np.arange(points.size)
        graph.rank = rank
    return graph


def build_rgg(
    space: SpaceSpec, intensity: float, beta: float, rng: np.random.Generator
) -> GeometricGraph:
    """Sample a fresh Poisson point set and wrap it as a geometric graph."""
    params = derive_params(space, intensity, beta)
    points = sample_point_set(space, intensity, rng)
    return assemble_graph(points, params)


def closest_to_center(graph: GeometricGraph) -> int:
    """Vertex nearest the space's reference point; ties go to the lowest id."""
    if graph.size == 0:
        raise EmptyGraphError("graph has no vertices")
    d = distance_to_many(graph.space, graph.points.positions, center(graph.space))
    return int(np.argmin(d))


def neighbors(graph: GeometricGraph, v: int) -> np.ndarray:
    return neighbors_within(graph.index, v, graph.params.radius)


def degree(graph: GeometricGraph, v: int) -> int:
    return int(neighbors(graph, v).size)


def degrees_all(graph: GeometricGraph) -> np.ndarray:
    """Degree of every vertex.

    Cube graphs are counted in bulk (1-d: rank ranges; higher dimensions:
    per-cell pairwise blocks).  Sphere graphs fall back to per-vertex queries.
    """
    m = graph.size
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    space = graph.space
    r = graph.params.radius
    pos = graph.points.positions

    if graph.sorted_x is not None:
        xs = graph.sorted_x
        lo = np.searchsorted(xs, xs - r, side="left")
        hi = np.searchsorted(xs, xs + r, side="right")
        deg_sorted = hi - lo - 1
        out = np.empty(m, dtype=np.int64)
        out[graph.order] = deg_sorted
        return out

    if isinstance(space, Cube):
        out = np.zeros(m, dtype=np.int64)
        index = graph.index
        for cell in np.unique(index.cell_ids):
            lo_c, hi_c = index.cell_start[cell], index.cell_start[cell + 1]
            members = index.ids_sorted[lo_c:hi_c]
            rep = pos[members[0]]
            ranges = index.query_ranges(rep)
            cand = np.concatenate([index.ids_sorted[a:b] for a, b in ranges])
            cand_pos = pos[cand]
            step = max(1, _BLOCK_LIMIT // max(1, len(cand)))
            for i in range(0, len(members), step):
                rows = members[i : i + step]
                row_pos = pos[rows]
                # one 2-d comparison per axis avoids a (k, K, n) intermediate
                within = np.abs(row_pos[:, :1] - cand_pos[None, :, 0]) <= r
                for axis in range(1, row_pos.shape[1]):
                    within &= np.abs(row_pos[:, axis : axis + 1] - cand_pos[None, :, axis]) <= r
                out[rows] = within.sum(axis=1) - 1
        return out

    return np.array([degree(graph, v) for v in range(m)], dtype=np.int64)


def interior_mask(graph: GeometricGraph) -> np.ndarray:
    """Vertices farther than one radius from the cube boundary (all, on the sphere)."""
    if isinstance(graph.space, Cube):
        r = graph.params.radius
        pos = graph.points.positions
        return np.all((pos >= r) & (pos <= 1.0 - r), axis=1)
    return np.ones(graph.size, dtype=bool)


def degree_stats(graph: GeometricGraph) -> dict[str, float]:
    """min/max/mean degree over interior vertices (NaN stats if none qualify)."""
    degs = degrees_all(graph)[interior_mask(graph)]
    if degs.size == 0:
        return {"min": float("nan"), "max": float("nan"), "mean": float("nan")}
    return {"min": float(degs.min()), "max": float(degs.max()), "mean": float(degs.mean())}


def degree_band(intensity: float, beta: float, dimension: int) -> tuple[float, float]:
    """Concentration band for interior degrees: N^beta +- (2n+1) N^((n-1)beta+gamma)/n,
    with gamma = 3*beta/(3+n)."""
    n = dimension
    gamma = 3.0 * beta / (3.0 + n)
    slack = (2 * n + 1) * intensity ** (((n - 1) * beta + gamma) / n)
    mid = intensity**beta
    return mid - slack, mid + slack


def is_connected(graph: GeometricGraph) -> bool:
    """Breadth-first search over implicit neighbors (1-d cube: sorted-gap test)."""
    m = graph.size
    if m == 0:
        raise EmptyGraphError("graph has no vertices")
    if m == 1:
        return True
    if graph.sorted_x is not None:
        gaps = np.diff(graph.sorted_x)
        return bool(np.all(gaps <= graph.params.radius))
    seen = np.zeros(m, dtype=bool)
    seen[0] = True
    queue = deque([0])
    remaining = m - 1
    while queue and remaining:
        v = queue.popleft()
        for w in neighbors(graph, v):
            if not seen[w]:
                seen[w] = True
                remaining -= 1
                queue.append(int(w))
    return remaining == 0
