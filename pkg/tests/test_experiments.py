import math
import os

import numpy as np
import pytest

from coopsim.errors import ConfigError, UnsupportedTopologyError
from coopsim.experiments import (
    BoxTracker,
    CompleteSpace,
    ExperimentConfig,
    WavefrontTrace,
    dbpc_survival_sweep,
    invasion_probability_sweep,
    invasion_time_experiment,
    late_run_slope,
    load_config,
    make_config,
    parse_config_file,
    replicate_stream,
    run_one_replicate,
    time_prediction,
    validate_graph,
    wavefront_experiment,
    write_csv,
    write_points_csv,
)
from coopsim.geometry import Cube, Sphere2, sample_point_set
from coopsim.rgg import build_rgg

CONFIG_TEXT = """
[space]
kind = cube
dimension = 1

[experiment]
intensity = 2000
beta = 0.6
a_grid = 2.0
u = 1.0
replicates = 6
base_seed = 7
graph_mode = fresh
mode = full
threads = 1
"""


@pytest.fixture
def config_path(tmp_path):
    p = tmp_path / "exp.ini"
    p.write_text(CONFIG_TEXT)
    return str(p)


def small_config(**kw):
    base = dict(
        space=Cube(1), intensity=2000.0, beta=0.6, a_grid=(2.0,),
        replicates=6, base_seed=7,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_replicate_streams_are_independent():
    a = replicate_stream(1, 2, 3, 4).random(4)
    b = replicate_stream(1, 2, 3, 5).random(4)
    c = replicate_stream(1, 2, 3, 4).random(4)
    assert not np.allclose(a, b)
    assert np.allclose(a, c)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(a_grid=())
    with pytest.raises(ConfigError):
        small_config(a_grid=(2.0, 1.0))
    with pytest.raises(ConfigError):
        small_config(replicates=0)
    with pytest.raises(ConfigError):
        small_config(beta=1.2)
    with pytest.raises(ConfigError):
        small_config(u=0.0)
    with pytest.raises(ConfigError):
        small_config(graph_mode="warm")


def test_config_file_round_trip(config_path):
    cfg = load_config(config_path)
    assert cfg.space == Cube(1)
    assert cfg.intensity == 2000
    assert cfg.beta == 0.6
    assert cfg.a_grid == (2.0,)
    assert cfg.base_seed == 7
    # overrides win
    cfg2 = load_config(config_path, base_seed=99, threads=2)
    assert cfg2.base_seed == 99
    assert cfg2.threads == 2


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config_file(str(tmp_path / "missing.ini"))
    bad = tmp_path / "bad.ini"
    bad.write_text("[space]\nkind = torus\n[experiment]\nintensity = 10\nbeta = 0.5\na_grid = 1\nreplicates = 1\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(bad))
    unknown = tmp_path / "unknown.ini"
    unknown.write_text(CONFIG_TEXT + "oops = 1\n")
    with pytest.raises(ConfigError):
        parse_config_file(str(unknown))


def test_brood_size_and_complete_size():
    cfg = small_config(space=CompleteSpace(), intensity=1e8, beta=0.5)
    assert cfg.complete_size == 10**4
    assert cfg.brood_size(2.0) == 200
    cube = small_config(intensity=1e5, beta=0.7)
    assert cube.brood_size(1.0) == round(math.sqrt(10**3.5))


def test_sweep_row_counting():
    cfg = small_config(replicates=10, a_grid=(2.5,), intensity=400.0)
    rows = invasion_probability_sweep(cfg, bound_replicates=200)
    (row,) = rows
    assert row.replicates == 10
    assert 0 <= row.invaded <= 10
    assert row.fraction == row.invaded / 10
    want_se = math.sqrt(row.fraction * (1 - row.fraction) / 10)
    assert row.stderr == pytest.approx(want_se)
    assert 0 <= row.pi_lower <= 1 and 0 <= row.pi_upper <= 1


def test_sweep_with_unit_brood_never_invades():
    # a small enough that round(a * sqrt(scale)) = 1: lone parasites die
    cfg = small_config(a_grid=(0.02,), replicates=8, intensity=900.0)
    assert cfg.brood_size(0.02) == 1
    rows = invasion_probability_sweep(cfg, bound_replicates=100)
    assert rows[0].fraction == 0.0


def test_sweep_deterministic_across_threads():
    cfg1 = small_config(replicates=8, threads=1, intensity=600.0)
    cfg2 = small_config(replicates=8, threads=3, intensity=600.0)
    r1 = invasion_probability_sweep(cfg1, bound_replicates=300)
    r2 = invasion_probability_sweep(cfg2, bound_replicates=300)
    assert r1 == r2


def test_shared_graph_mode_runs():
    cfg = small_config(graph_mode="shared", replicates=5, intensity=800.0)
    rows = invasion_probability_sweep(cfg, bound_replicates=100)
    assert rows[0].replicates == 5


def test_complete_space_sweep():
    cfg = small_config(space=CompleteSpace(), intensity=10**6, beta=0.5, replicates=20)
    rows = invasion_probability_sweep(cfg, bound_replicates=500)
    assert rows[0].v == round(2.0 * math.sqrt(1000.0))
    assert 0.0 <= rows[0].fraction <= 1.0


def test_time_prediction_arithmetic():
    cfg = small_config(intensity=1e6, beta=0.5)
    pred = time_prediction(cfg)
    assert pred.lower == 1000
    assert pred.upper_base == 1000
    assert pred.slack_loglog == pytest.approx(math.log(math.log(1e6)))
    eps = 1e6 ** ((0.25 - 1.0) / 1 + 0.01)
    assert pred.slack_eps == pytest.approx(eps / (0.5e-3) ** 2)


def test_time_experiment_rows(rng):
    cfg = small_config(intensity=3000.0, replicates=6, a_grid=(2.5,))
    rows, pred = invasion_time_experiment(cfg, remove_initial_phase=True)
    # extinct replicates contribute no row
    assert len(rows) <= 6
    for row in rows:
        assert row.T >= pred.lower
        assert row.T_minus_initial is not None
        assert 0 <= row.T_minus_initial <= row.T


def test_time_experiment_validation():
    with pytest.raises(UnsupportedTopologyError):
        invasion_time_experiment(small_config(space=CompleteSpace()))
    with pytest.raises(ConfigError):
        invasion_time_experiment(small_config(u=0.5))
    with pytest.raises(ConfigError):
        invasion_time_experiment(small_config(a_grid=(1.0, 2.0)))


def test_box_tracker_detects_first_full_box(rng):
    graph = build_rgg(Cube(1), 500.0, 0.6, rng)
    tracker = BoxTracker(graph)
    # feeding every vertex certainly fills some box
    tracker.record(np.arange(graph.size), 3)
    assert tracker.full_generation == 3
    # recording after the first detection does not move it
    tracker.record(np.arange(graph.size), 9)
    assert tracker.full_generation == 3


def test_wavefront_traces(rng):
    cfg = small_config(intensity=2500.0, replicates=5, a_grid=(2.5,))
    traces = wavefront_experiment(cfg)
    for t in traces:
        assert t.generations[0] == 0
        assert t.box_distances[0] == 0
        diffs = np.diff(t.box_distances)
        assert np.all(diffs >= 0)
        assert np.all(diffs <= 2)


def test_late_run_slope_on_synthetic_trace():
    trace = WavefrontTrace(0, tuple(range(11)), tuple(2 * g for g in range(11)))
    assert late_run_slope(trace) == pytest.approx(2.0)


def test_validate_graph_report():
    cfg = small_config(intensity=5000.0, beta=0.7)
    report = validate_graph(cfg, seeds=5)
    assert report.seeds == 5
    assert 0.0 <= report.connectivity_rate <= 1.0
    assert 0.0 <= report.degree_band_rate <= 1.0


def test_dbpc_survival_sweep_rows():
    rows = dbpc_survival_sweep((0.5, 1.0, 2.0), z0=1, threshold=1000, replicates=2000, base_seed=3)
    assert len(rows) == 3
    assert all(r.survived + r.died + r.undecided == 2000 for r in rows)
    # nondecreasing beyond two pooled standard errors
    for lo, hi in zip(rows, rows[1:]):
        pooled = math.hypot(lo.stderr, hi.stderr)
        assert hi.pi_hat >= lo.pi_hat - 2 * pooled
    with pytest.raises(Exception):
        dbpc_survival_sweep((0.0,), 1, 1000, 10, 3)


def test_run_one_replicate_trace():
    cfg = small_config(a_grid=(0.02,), intensity=900.0)
    outcome, reports = run_one_replicate(cfg)
    assert outcome.kind == "extinct"
    assert len(reports) == 1


def test_write_csv_atomic(tmp_path):
    path = tmp_path / "out" / "rows.csv"
    write_csv(str(path), ["a", "b"], [[1, 0.5], [2, None]])
    text = path.read_text()
    assert text.splitlines() == ["a,b", "1,0.5", "2,"]
    leftovers = [f for f in os.listdir(tmp_path / "out") if f.endswith(".tmp")]
    assert leftovers == []


def test_write_points_csv(tmp_path, rng):
    pts = sample_point_set(Cube(2), 20.0, rng)
    path = tmp_path / "pts.csv"
    write_points_csv(pts, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "id,x0,x1"
    assert len(lines) == pts.size + 1
    sphere = sample_point_set(Sphere2(), 20.0, rng)
    write_points_csv(sphere, str(path))
    assert path.read_text().splitlines()[0] == "id,x,y,z"
