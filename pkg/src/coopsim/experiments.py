"""Declarative Monte Carlo campaigns over the epidemic and branching models.

Reproducibility model: every replicate owns a counter-based random stream
derived from (base_seed, purpose, subexperiment, replicate), so results are
independent of execution order and of the thread budget.  Aggregation is a
deterministic fold in replicate order, and CSV files are written atomically
(temp file + rename).
"""

from __future__ import annotations

import configparser
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dbpc import estimate_survival, poisson_dbpc
from .epidemic import (
    MODE_COSAME_ONLY,
    MODE_FULL,
    OUTCOME_FULL_INVASION,
    OUTCOME_TARGET_REACHED,
    EpidemicParams,
    GenerationReport,
    Outcome,
    build_complete_graph,
    init_epidemic,
    run_to_absorption,
)
from .errors import ConfigError, InvalidArgumentError, UnsupportedTopologyError
from .geometry import Cube, PointSet, Sphere2
from .rgg import (
    GeometricGraph,
    build_rgg,
    degree_band,
    degrees_all,
    derive_params,
    interior_mask,
    is_connected,
)
from .spatial_index import build_index

GRAPH_FRESH = "fresh"
GRAPH_SHARED = "shared"

# purpose tags keep streams of different experiment stages independent
PURPOSE_GRAPH = 0
PURPOSE_SWEEP = 1
PURPOSE_TIME = 2
PURPOSE_WAVEFRONT = 3
PURPOSE_DBPC = 4
PURPOSE_VALIDATE = 5
PURPOSE_BOUNDS = 6
PURPOSE_TRACE = 7

SWEEP_HEADER = ["a", "v", "replicates", "invaded", "fraction", "stderr", "pi_lower", "pi_upper"]
TIME_HEADER = ["replicate", "T", "T_lower", "T_upper_base", "T_minus_initial"]
WAVEFRONT_HEADER = ["replicate", "g", "box_distance"]
DBPC_HEADER = [
    "a", "z0", "threshold", "replicates", "survived", "died", "undecided", "pi_hat", "stderr",
]
TRACE_HEADER = ["g", "new_infected", "cumulative", "box_distance", "cosame", "codiff"]

DEFAULT_BOUND_REPLICATES = 10_000


@dataclass(frozen=True)
class CompleteSpace:
    """Marker for the well-mixed topology; vertex count is round(N**beta)."""


SpaceLike = Cube | Sphere2 | CompleteSpace


def replicate_stream(
    base_seed: int, purpose: int, sub: int, replicate: int
) -> np.random.Generator:
    """Counter-based stream for one replicate of one (sub)experiment."""
    if base_seed < 0:
        raise InvalidArgumentError("base_seed must be nonnegative")
    seq = np.random.SeedSequence((base_seed, purpose, sub, replicate))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class ExperimentConfig:
    space: SpaceLike
    intensity: float
    beta: float
    a_grid: tuple[float, ...]
    replicates: int
    base_seed: int = 0
    u: float = 1.0
    graph_mode: str = GRAPH_FRESH
    mode: str = MODE_FULL
    threads: int = 1
    output: str | None = None
    remove_initial_phase: bool = False

    def __post_init__(self) -> None:
        if not self.a_grid:
            raise ConfigError("a_grid must be nonempty")
        if any(b <= a for a, b in zip(self.a_grid, self.a_grid[1:])):
            raise ConfigError("a_grid must be strictly increasing")
        if any(a <= 0 for a in self.a_grid):
            raise ConfigError("a_grid entries must be positive")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not 0.0 < self.beta < 1.0:
            raise ConfigError(f"beta must lie in (0,1), got {self.beta}")
        if not self.intensity >= 1:
            raise ConfigError(f"intensity must be >= 1, got {self.intensity}")
        if not 0.0 < self.u <= 1.0:
            raise ConfigError(f"u must lie in (0,1], got {self.u}")
        if self.graph_mode not in (GRAPH_FRESH, GRAPH_SHARED):
            raise ConfigError(f"unknown graph_mode {self.graph_mode!r}")
        if self.mode not in (MODE_FULL, MODE_COSAME_ONLY):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be nonnegative")

    @property
    def degree_scale(self) -> float:
        """Expected-degree scale: N**beta, which is also the complete-graph size."""
        return self.intensity**self.beta

    @property
    def complete_size(self) -> int:
        return int(round(self.degree_scale))

    def brood_size(self, a: float) -> int:
        return max(1, int(round(a * math.sqrt(self.degree_scale))))

    def bound_dimension(self) -> int:
        """Dimension n in the lower-bound scale a / sqrt(2**n)."""
        if isinstance(self.space, Cube):
            return self.space.dimension
        if isinstance(self.space, Sphere2):
            return 2
        return 1

    def survival_threshold(self) -> int:
        """Host-population size: the branching process 'survives' at this level."""
        if isinstance(self.space, CompleteSpace):
            return max(2, self.complete_size)
        return max(2, int(round(self.intensity)))


# -- config files -------------------------------------------------------------

_SPACE_KEYS = {"kind", "dimension"}
_EXPERIMENT_KEYS = {
    "intensity", "beta", "a_grid", "u", "replicates", "base_seed", "graph_mode",
    "mode", "threads", "output", "remove_initial_phase",
}


def parse_config_file(path: str) -> dict:
    """Read the INI-style config into a flat dict of raw values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "space" not in parser or "experiment" not in parser:
        raise ConfigError("config needs [space] and [experiment] sections")
    raw: dict = {}
    space = parser["space"]
    unknown = set(space) - _SPACE_KEYS
    if unknown:
        raise ConfigError(f"unknown [space] keys: {sorted(unknown)}")
    kind = space.get("kind", "").strip().lower()
    if kind == "cube":
        raw["space"] = Cube(dimension=space.getint("dimension", 1))
    elif kind == "sphere":
        raw["space"] = Sphere2()
    elif kind == "complete":
        raw["space"] = CompleteSpace()
    else:
        raise ConfigError(f"space kind must be cube, sphere or complete, got {kind!r}")

    exp = parser["experiment"]
    unknown = set(exp) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown [experiment] keys: {sorted(unknown)}")
    try:
        raw["intensity"] = exp.getfloat("intensity")
        raw["beta"] = exp.getfloat("beta")
        raw["a_grid"] = tuple(float(t) for t in exp.get("a_grid", "").split(",") if t.strip())
        raw["replicates"] = exp.getint("replicates")
        if "u" in exp:
            raw["u"] = exp.getfloat("u")
        if "base_seed" in exp:
            raw["base_seed"] = exp.getint("base_seed")
        if "graph_mode" in exp:
            raw["graph_mode"] = exp.get("graph_mode").strip().lower()
        if "mode" in exp:
            raw["mode"] = exp.get("mode").strip().lower()
        if "threads" in exp:
            raw["threads"] = exp.getint("threads")
        if "output" in exp:
            raw["output"] = exp.get("output").strip()
        if "remove_initial_phase" in exp:
            raw["remove_initial_phase"] = exp.getboolean("remove_initial_phase")
    except ValueError as err:
        raise ConfigError(f"bad value in [experiment]: {err}") from err
    missing = [k for k in ("intensity", "beta", "a_grid", "replicates") if k not in raw or raw[k] is None]
    if missing:
        raise ConfigError(f"missing required keys: {missing}")
    return raw


def make_config(raw: dict, **overrides) -> ExperimentConfig:
    """Build a validated config; ``overrides`` (CLI flags) win over file values."""
    merged = dict(raw)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    try:
        return ExperimentConfig(**merged)
    except TypeError as err:
        raise ConfigError(str(err)) from err


def load_config(path: str, **overrides) -> ExperimentConfig:
    return make_config(parse_config_file(path), **overrides)


# -- CSV ----------------------------------------------------------------------


def _format(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str, header: list[str], rows) -> None:
    """Write rows atomically so interrupted runs never leave a truncated file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".coopsim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_format(x) for x in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_points_csv(points: PointSet, path: str) -> None:
    """Dump point coordinates: id,x0..x{n-1} for cubes, id,x,y,z for the sphere."""
    if isinstance(points.space, Cube):
        header = ["id"] + [f"x{i}" for i in range(points.space.dimension)]
    else:
        header = ["id", "x", "y", "z"]
    rows = ([i, *points.positions[i]] for i in range(points.size))
    write_csv(path, header, rows)


# -- parallel plumbing ---------------------------------------------------------


def _parallel_map(fn, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


_SHARED_GRAPHS: dict = {}


def _shared_graph(config: ExperimentConfig) -> GeometricGraph:
    key = (config.base_seed, config.space, config.intensity, config.beta)
    graph = _SHARED_GRAPHS.get(key)
    if graph is None:
        stream = replicate_stream(config.base_seed, PURPOSE_GRAPH, 0, 0)
        graph = build_rgg(config.space, config.intensity, config.beta, stream)
        _SHARED_GRAPHS.clear()  # hold at most one; they can be large
        _SHARED_GRAPHS[key] = graph
    return graph


def _replicate_graph(config: ExperimentConfig, stream: np.random.Generator):
    if isinstance(config.space, CompleteSpace):
        return build_complete_graph(config.complete_size)
    if config.graph_mode == GRAPH_SHARED:
        return _shared_graph(config)
    return build_rgg(config.space, config.intensity, config.beta, stream)


# -- invasion probability sweep -------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    a: float
    v: int
    replicates: int
    invaded: int
    fraction: float
    stderr: float
    pi_lower: float
    pi_upper: float

    def as_csv_row(self) -> list:
        return [self.a, self.v, self.replicates, self.invaded, self.fraction,
                self.stderr, self.pi_lower, self.pi_upper]


def _sweep_replicate(task) -> bool:
    config, a_index, rep = task
    a = config.a_grid[a_index]
    stream = replicate_stream(config.base_seed, PURPOSE_SWEEP, a_index, rep)
    graph = _replicate_graph(config, stream)
    params = EpidemicParams(
        parasites_per_infection=config.brood_size(a),
        target_proportion=config.u,
        mode=config.mode,
        cooperativity_a=a,
    )
    state = init_epidemic(graph, params)
    outcome, _ = run_to_absorption(state, params, stream)
    return outcome.kind in (OUTCOME_FULL_INVASION, OUTCOME_TARGET_REACHED)


def survival_bounds(
    config: ExperimentConfig, a_index: int, bound_replicates: int = DEFAULT_BOUND_REPLICATES
) -> tuple[float, float]:
    """Monte Carlo survival probabilities bracketing the invasion probability:
    (pi_lower at a / sqrt(2**n), pi_upper at a)."""
    a = config.a_grid[a_index]
    threshold = config.survival_threshold()
    upper = estimate_survival(
        poisson_dbpc(a), z0=1, threshold=threshold, replicates=bound_replicates,
        rng=replicate_stream(config.base_seed, PURPOSE_BOUNDS, a_index, 0),
    )
    a_low = a / math.sqrt(2.0 ** config.bound_dimension())
    lower = estimate_survival(
        poisson_dbpc(a_low), z0=1, threshold=threshold, replicates=bound_replicates,
        rng=replicate_stream(config.base_seed, PURPOSE_BOUNDS, a_index, 1),
    )
    return lower.pi_hat, upper.pi_hat


def invasion_probability_sweep(
    config: ExperimentConfig, bound_replicates: int = DEFAULT_BOUND_REPLICATES
) -> list[SweepRow]:
    """Fraction of replicates whose infection reached the target proportion,
    per grid value of a, with branching-process bound estimates attached."""
    tasks = [
        (config, a_index, rep)
        for a_index in range(len(config.a_grid))
        for rep in range(config.replicates)
    ]
    flags = _parallel_map(_sweep_replicate, tasks, config.threads)
    rows: list[SweepRow] = []
    for a_index, a in enumerate(config.a_grid):
        chunk = flags[a_index * config.replicates : (a_index + 1) * config.replicates]
        invaded = int(sum(chunk))
        fraction = invaded / config.replicates
        stderr = math.sqrt(fraction * (1.0 - fraction) / config.replicates)
        pi_lower, pi_upper = survival_bounds(config, a_index, bound_replicates)
        rows.append(
            SweepRow(
                a=a, v=config.brood_size(a), replicates=config.replicates,
                invaded=invaded, fraction=fraction, stderr=stderr,
                pi_lower=pi_lower, pi_upper=pi_upper,
            )
        )
    return rows


# -- invasion time ---------------------------------------------------------------


@dataclass(frozen=True)
class InvasionTimePrediction:
    """Reference window for the full-invasion generation count."""

    lower: int
    upper_base: int
    slack_loglog: float
    slack_eps: float
    delta: float = 0.01


def time_prediction(config: ExperimentConfig, delta: float = 0.01) -> InvasionTimePrediction:
    if isinstance(config.space, CompleteSpace):
        raise UnsupportedTopologyError("invasion-time prediction needs a geometric space")
    n = config.bound_dimension()
    radius = derive_params(config.space, config.intensity, config.beta).radius
    base = 1.0 / (2.0 * radius)
    eps = config.intensity ** ((config.beta / 2.0 - 1.0) / n + delta)
    return InvasionTimePrediction(
        lower=math.floor(base),
        upper_base=math.ceil(base),
        slack_loglog=math.log(math.log(config.intensity)),
        slack_eps=eps / radius**2,
        delta=delta,
    )


class BoxTracker:
    """Tracks when any half-radius box first has all its vertices infected
    or removed; that generation marks the end of the initial phase."""

    def __init__(self, graph: GeometricGraph) -> None:
        index = build_index(graph.points, graph.params.radius / 2.0)
        self.box_of = index.cell_ids
        self.totals = np.bincount(self.box_of, minlength=int(index.cell_start.size - 1))
        self.hits = np.zeros_like(self.totals)
        self.full_generation: int | None = None

    def record(self, new_ids: np.ndarray, generation: int) -> None:
        if self.full_generation is not None or new_ids.size == 0:
            return
        np.add.at(self.hits, self.box_of[new_ids], 1)
        occupied = self.totals > 0
        if np.any(self.hits[occupied] == self.totals[occupied]):
            self.full_generation = generation


@dataclass(frozen=True)
class TimeRow:
    replicate: int
    T: int
    T_minus_initial: int | None

    def as_csv_row(self, prediction: InvasionTimePrediction) -> list:
        return [self.replicate, self.T, prediction.lower, prediction.upper_base,
                self.T_minus_initial]


def _single_a(config: ExperimentConfig) -> float:
    if len(config.a_grid) != 1:
        raise ConfigError("this experiment needs exactly one a_grid entry")
    return config.a_grid[0]


def invasion_time_experiment(
    config: ExperimentConfig, remove_initial_phase: bool | None = None
) -> tuple[list[TimeRow], InvasionTimePrediction]:
    """Full-invasion generation counts, one row per successful replicate."""
    if isinstance(config.space, CompleteSpace):
        raise UnsupportedTopologyError("invasion-time experiment needs a geometric space")
    if config.u != 1.0:
        raise ConfigError("invasion time is defined for u = 1")
    a = _single_a(config)
    if remove_initial_phase is None:
        remove_initial_phase = config.remove_initial_phase
    prediction = time_prediction(config)
    tasks = [(config, a, rep, remove_initial_phase) for rep in range(config.replicates)]
    results = _parallel_map(_time_replicate, tasks, config.threads)
    rows = [row for row in results if row is not None]
    return rows, prediction


def _time_replicate(task) -> TimeRow | None:
    config, a, rep, remove_initial = task
    stream = replicate_stream(config.base_seed, PURPOSE_TIME, 0, rep)
    graph = _replicate_graph(config, stream)
    params = EpidemicParams(
        parasites_per_infection=config.brood_size(a), target_proportion=1.0,
        mode=config.mode, cooperativity_a=a,
    )
    state = init_epidemic(graph, params)
    tracker = BoxTracker(graph) if remove_initial else None
    if tracker is None:
        outcome, _ = run_to_absorption(state, params, stream)
    else:
        tracker.record(state.infected, 0)
        outcome, _ = run_to_absorption(
            state, params, stream,
            on_generation=lambda s: tracker.record(s.infected, s.generation),
        )
    if outcome.kind != OUTCOME_FULL_INVASION:
        return None
    initial = tracker.full_generation if tracker is not None else None
    return TimeRow(
        replicate=rep,
        T=outcome.generation,
        T_minus_initial=None if initial is None else outcome.generation - initial,
    )


# -- wavefront --------------------------------------------------------------------


@dataclass(frozen=True)
class WavefrontTrace:
    replicate: int
    generations: tuple[int, ...]
    box_distances: tuple[int, ...]


def _wavefront_replicate(task) -> WavefrontTrace | None:
    config, a, rep = task
    stream = replicate_stream(config.base_seed, PURPOSE_WAVEFRONT, 0, rep)
    graph = _replicate_graph(config, stream)
    params = EpidemicParams(
        parasites_per_infection=config.brood_size(a), target_proportion=config.u,
        mode=config.mode, cooperativity_a=a,
    )
    state = init_epidemic(graph, params)
    outcome, reports = run_to_absorption(state, params, stream)
    if outcome.kind not in (OUTCOME_FULL_INVASION, OUTCOME_TARGET_REACHED):
        return None
    gens = (0,) + tuple(r.generation for r in reports)
    dists = (0,) + tuple(r.max_box_distance for r in reports)
    return WavefrontTrace(replicate=rep, generations=gens, box_distances=dists)


def wavefront_experiment(config: ExperimentConfig) -> list[WavefrontTrace]:
    """Box-distance traces of successful invasions (generation 0 included)."""
    if isinstance(config.space, CompleteSpace):
        raise UnsupportedTopologyError("wavefront tracking needs a geometric space")
    a = _single_a(config)
    tasks = [(config, a, rep) for rep in range(config.replicates)]
    results = _parallel_map(_wavefront_replicate, tasks, config.threads)
    return [trace for trace in results if trace is not None]


def late_run_slope(trace: WavefrontTrace) -> float:
    """Least-squares slope of box distance per generation over the final half
    of the trace (NaN when fewer than two points qualify)."""
    g = np.asarray(trace.generations, dtype=float)
    d = np.asarray(trace.box_distances, dtype=float)
    start = len(g) // 2
    g, d = g[start:], d[start:]
    if g.size < 2:
        return float("nan")
    return float(np.polyfit(g, d, 1)[0])


# -- graph validation ---------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    seeds: int
    connectivity_rate: float
    degree_band_rate: float


def validate_graph(config: ExperimentConfig, seeds: int) -> ValidationReport:
    """Fraction of fresh graphs that are connected, and the mean fraction of
    interior vertices whose degree falls in the concentration band."""
    if isinstance(config.space, CompleteSpace):
        raise UnsupportedTopologyError("graph validation needs a geometric space")
    if seeds < 1:
        raise InvalidArgumentError("seeds must be >= 1")
    connected = 0
    band_rates: list[float] = []
    lo, hi = degree_band(config.intensity, config.beta, config.bound_dimension())
    for s in range(seeds):
        stream = replicate_stream(config.base_seed, PURPOSE_VALIDATE, 0, s)
        graph = build_rgg(config.space, config.intensity, config.beta, stream)
        if is_connected(graph):
            connected += 1
        degs = degrees_all(graph)[interior_mask(graph)]
        if degs.size:
            band_rates.append(float(np.mean((degs >= lo) & (degs <= hi))))
    return ValidationReport(
        seeds=seeds,
        connectivity_rate=connected / seeds,
        degree_band_rate=float(np.mean(band_rates)) if band_rates else float("nan"),
    )


# -- branching-process survival sweep --------------------------------------------------


@dataclass(frozen=True)
class DbpcSweepRow:
    a: float
    z0: int
    threshold: int
    replicates: int
    survived: int
    died: int
    undecided: int
    pi_hat: float
    stderr: float

    def as_csv_row(self) -> list:
        return [self.a, self.z0, self.threshold, self.replicates, self.survived,
                self.died, self.undecided, self.pi_hat, self.stderr]


def dbpc_survival_sweep(
    a_grid, z0: int, threshold: int, replicates: int, base_seed: int
) -> list[DbpcSweepRow]:
    rows = []
    for a_index, a in enumerate(a_grid):
        est = estimate_survival(
            poisson_dbpc(a), z0=z0, threshold=threshold, replicates=replicates,
            rng=replicate_stream(base_seed, PURPOSE_DBPC, a_index, 0),
        )
        rows.append(
            DbpcSweepRow(
                a=a, z0=z0, threshold=threshold, replicates=replicates,
                survived=est.survived, died=est.died, undecided=est.undecided,
                pi_hat=est.pi_hat, stderr=est.stderr,
            )
        )
    return rows


# -- single replicate trace -------------------------------------------------------------


def run_one_replicate(
    config: ExperimentConfig, a: float | None = None, replicate: int = 0
) -> tuple[Outcome, list[GenerationReport]]:
    """Run a single replicate and return its outcome plus per-generation trace."""
    a = a if a is not None else config.a_grid[0]
    stream = replicate_stream(config.base_seed, PURPOSE_TRACE, 0, replicate)
    graph = _replicate_graph(config, stream)
    params = EpidemicParams(
        parasites_per_infection=config.brood_size(a), target_proportion=config.u,
        mode=config.mode, cooperativity_a=a,
    )
    state = init_epidemic(graph, params)
    return run_to_absorption(state, params, stream)


def trace_csv_rows(reports: list[GenerationReport]) -> list[list]:
    return [
        [r.generation, r.newly_infected, r.cumulative, r.max_box_distance,
         r.cosame_count, r.codiff_count]
        for r in reports
    ]
