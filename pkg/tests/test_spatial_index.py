import numpy as np
import pytest

from conftest import brute_force_neighbors
from coopsim.errors import InvalidArgumentError
from coopsim.geometry import Cube, PointSet, Sphere2, sample_point_set
from coopsim.spatial_index import build_index, neighbors_within


def make_points(space, positions):
    positions = np.asarray(positions, dtype=float)
    if positions.ndim == 1:
        positions = positions.reshape(-1, 1)
    return PointSet(space=space, positions=positions, intensity=float(len(positions)))


def test_empty_index():
    idx = build_index(make_points(Cube(1), np.zeros((0, 1))), 0.1)
    assert idx.size == 0
    assert idx.buckets() == {}


def test_two_points_far_apart_in_distinct_buckets():
    idx = build_index(make_points(Cube(1), [0.05, 0.96]), 0.1)
    assert idx.cell_of(0) != idx.cell_of(1)


def test_every_point_retrievable_from_own_bucket(rng):
    pts = sample_point_set(Cube(2), 1000.0, rng)
    idx = build_index(pts, 0.1)
    buckets = idx.buckets()
    seen = sorted(i for ids in buckets.values() for i in ids)
    assert seen == list(range(pts.size))
    for pid in range(pts.size):
        assert pid in buckets[idx.cell_of(pid)]


def test_neighbors_basic_line():
    idx = build_index(make_points(Cube(1), [0.10, 0.15, 0.90]), 0.1)
    assert set(neighbors_within(idx, 0, 0.1)) == {1}
    assert set(neighbors_within(idx, 2, 0.1)) == set()


def test_self_never_a_neighbor(rng):
    pts = sample_point_set(Cube(2), 300.0, rng)
    idx = build_index(pts, 0.15)
    for pid in range(0, pts.size, 7):
        assert pid not in neighbors_within(idx, pid, 0.15)


def test_brute_force_match_500_points(rng):
    pts = sample_point_set(Cube(2), 500.0, rng)
    idx = build_index(pts, 0.07)
    for pid in range(pts.size):
        got = set(int(x) for x in neighbors_within(idx, pid, 0.07))
        want = brute_force_neighbors(Cube(2), pts.positions, pid, 0.07)
        assert got == want


@pytest.mark.parametrize("trial", range(20))
def test_oracle_equivalence_random_instances(trial):
    # mixed spaces and radii; sphere radii kept under pi/2
    rng = np.random.default_rng(5000 + trial)
    spaces = [Cube(1), Cube(2), Cube(3), Sphere2()]
    space = spaces[trial % len(spaces)]
    intensity = float(rng.integers(20, 400))
    pts = sample_point_set(space, intensity, rng)
    if pts.size < 2:
        return
    radius = float(rng.uniform(0.02, 0.3))
    idx = build_index(pts, radius)
    check_ids = rng.integers(0, pts.size, size=min(60, pts.size))
    for pid in set(int(i) for i in check_ids):
        got = set(int(x) for x in neighbors_within(idx, pid, radius))
        want = brute_force_neighbors(space, pts.positions, pid, radius)
        assert got == want, f"space={space} radius={radius} pid={pid}"


def test_cube_boundary_no_wraparound():
    # points pinned to the faces: neighborhoods truncate, never wrap
    positions = [0.0, 0.04, 0.5, 0.97, 1.0]
    idx = build_index(make_points(Cube(1), positions), 0.05)
    assert set(neighbors_within(idx, 0, 0.05)) == {1}
    assert set(neighbors_within(idx, 4, 0.05)) == {3}
    assert set(neighbors_within(idx, 2, 0.05)) == set()


def test_poles_and_wraparound_on_sphere():
    positions = np.array(
        [
            [0.0, 0.0, 1.0],        # north pole
            [0.05, 0.0, 0.9987],    # near pole
            [1.0, 0.0, 0.0],        # equator, lon 0
            [0.9997, -0.025, 0.0],  # equator, lon just below 0 (wraps)
            [0.0, 0.0, -1.0],       # south pole
        ]
    )
    positions /= np.linalg.norm(positions, axis=1, keepdims=True)
    pts = PointSet(Sphere2(), positions, 5.0)
    idx = build_index(pts, 0.1)
    for pid in range(5):
        got = set(int(x) for x in neighbors_within(idx, pid, 0.1))
        want = brute_force_neighbors(Sphere2(), positions, pid, 0.1)
        assert got == want


def test_bad_arguments(rng):
    pts = sample_point_set(Cube(1), 50.0, rng)
    with pytest.raises(InvalidArgumentError):
        build_index(pts, 0.0)
    idx = build_index(pts, 0.1)
    with pytest.raises(InvalidArgumentError):
        neighbors_within(idx, pts.size + 3, 0.1)
    with pytest.raises(InvalidArgumentError):
        neighbors_within(idx, 0, 0.2)
    with pytest.raises(InvalidArgumentError):
        build_index(sample_point_set(Sphere2(), 50.0, rng), 2.0)


def test_neighbor_order_deterministic(rng):
    pts = sample_point_set(Cube(2), 400.0, rng)
    idx1 = build_index(pts, 0.1)
    idx2 = build_index(pts, 0.1)
    for pid in range(0, pts.size, 11):
        assert np.array_equal(neighbors_within(idx1, pid, 0.1), neighbors_within(idx2, pid, 0.1))
