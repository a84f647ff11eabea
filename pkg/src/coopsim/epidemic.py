"""Generation-synchronous infection dynamics with cooperating parasites.

Hosts sit on the vertices of a geometric graph or a complete graph.  When a
host dies, a fixed brood of parasites is released; at the start of the next
generation every parasite independently picks a uniformly random neighbor of
its vertex and attacks the host there.  A susceptible host struck by at least
two parasites (in "full" mode) dies and releases a new brood; a lone attacker
dies with no effect, as do parasites arriving at already-dead vertices or
released from isolated vertices.

Parasites are never materialized individually: movement is simulated by
drawing destination indices per infected vertex and accumulating per-target
attack tallies, which keeps a generation at O(moved parasites) time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyGraphError,
    IllegalStateError,
    InvalidArgumentError,
    UnsupportedTopologyError,
)
from .geometry import Cube, distance_to_many
from .rgg import GeometricGraph, closest_to_center
from .spatial_index import neighbors_within

MODE_FULL = "full"
MODE_COSAME_ONLY = "cosame_only"

SUSCEPTIBLE, INFECTED, REMOVED = 0, 1, 2

OUTCOME_EXTINCT = "extinct"
OUTCOME_TARGET_REACHED = "target_reached"
OUTCOME_FULL_INVASION = "full_invasion"
OUTCOME_CAP_EXCEEDED = "cap_exceeded"

_REJECTION_ROUNDS = 16
_DEFAULT_COMPLETE_CAP = 10**4


@dataclass(frozen=True)
class EpidemicParams:
    """Infection-rule knobs.

    parasites_per_infection: brood size released when a host dies.
    cooperativity_a: optional record of the scale a when the brood size was
        chosen as round(a * sqrt(expected degree)); informational only.
    target_proportion: the u in "invasion reached a proportion u of hosts".
    generation_cap: None picks a per-topology default when a run starts.
    """

    parasites_per_infection: int
    target_proportion: float = 1.0
    mode: str = MODE_FULL
    generation_cap: int | None = None
    cooperativity_a: float | None = None

    def __post_init__(self) -> None:
        if self.parasites_per_infection < 1:
            raise InvalidArgumentError("parasites_per_infection must be >= 1")
        if not 0.0 < self.target_proportion <= 1.0:
            raise InvalidArgumentError("target_proportion must lie in (0, 1]")
        if self.mode not in (MODE_FULL, MODE_COSAME_ONLY):
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")
        if self.generation_cap is not None and self.generation_cap < 1:
            raise InvalidArgumentError("generation_cap must be positive")


class CompleteGraph:
    """Implicit complete topology: every vertex neighbors every other."""

    def __init__(self, size: int) -> None:
        if size < 2:
            raise InvalidArgumentError(f"complete graph needs >= 2 vertices, got {size}")
        self.size = size

    def neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.size:
            raise InvalidArgumentError(f"unknown vertex {v}")
        return np.concatenate([np.arange(v), np.arange(v + 1, self.size)])

    def degree(self, v: int) -> int:
        return self.size - 1


def build_complete_graph(size: int) -> CompleteGraph:
    return CompleteGraph(size)


Topology = GeometricGraph | CompleteGraph


@dataclass
class GenerationReport:
    generation: int
    newly_infected: int
    cumulative: int
    max_box_distance: int
    cosame_count: int
    codiff_count: int


@dataclass
class EpidemicState:
    """Mutable run state: the S/I/R partition plus counters.

    ``status`` holds one byte per vertex; ``infected`` is the sorted id array
    of the currently infected generation.  ``step_generation`` advances the
    state in place and returns it for convenience.
    """

    graph: Topology
    generation: int
    status: np.ndarray = field(repr=False)
    infected: np.ndarray = field(repr=False)
    cumulative: int
    origin: int
    max_box_distance: int = 0
    removed_count: int = 0

    def susceptible_ids(self) -> np.ndarray:
        return np.flatnonzero(self.status == SUSCEPTIBLE)

    def infected_ids(self) -> np.ndarray:
        return self.infected.copy()

    def removed_ids(self) -> np.ndarray:
        return np.flatnonzero(self.status == REMOVED)


@dataclass
class Outcome:
    kind: str
    generation: int
    cumulative: int
    state: EpidemicState | None = None


class DestinationTape:
    """Pre-drawn parasite destinations, one brood per vertex.

    Used for couplings: two runs reading the same tape see identical
    movement for every vertex, whenever that vertex happens to die.
    """

    def __init__(self, destinations: np.ndarray) -> None:
        self.destinations = destinations


def draw_destination_tape(
    graph: Topology, parasites_per_infection: int, rng: np.random.Generator
) -> DestinationTape:
    all_ids = np.arange(graph.size, dtype=np.int64)
    return DestinationTape(_sample_destinations(graph, all_ids, parasites_per_infection, rng))


def init_epidemic(
    graph: Topology, params: EpidemicParams, origin: int | None = None
) -> EpidemicState:
    """Start with a single infected vertex: the one closest to the space's
    center on geometric graphs, vertex 0 on (vertex-transitive) complete
    graphs, or an explicit override."""
    if graph.size == 0:
        raise EmptyGraphError("cannot start an epidemic on an empty graph")
    if origin is None:
        origin = closest_to_center(graph) if isinstance(graph, GeometricGraph) else 0
    if not 0 <= origin < graph.size:
        raise InvalidArgumentError(f"origin {origin} out of range")
    status = np.zeros(graph.size, dtype=np.uint8)
    status[origin] = INFECTED
    return EpidemicState(
        graph=graph,
        generation=0,
        status=status,
        infected=np.array([origin], dtype=np.int64),
        cumulative=1,
        origin=int(origin),
    )


# -- destination sampling ----------------------------------------------------


def _pairwise_within(space, a: np.ndarray, b: np.ndarray, radius: float) -> np.ndarray:
    if isinstance(space, Cube):
        return np.max(np.abs(a - b), axis=1) <= radius
    return np.arccos(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0)) <= radius


def _sample_destinations(
    graph: Topology, origins: np.ndarray, v: int, rng: np.random.Generator
) -> np.ndarray:
    """Destination vertex for each of the v parasites of each origin.

    Returns an (m, v) int64 array; -1 marks a parasite with nowhere to go
    (isolated origin).  Every destination is uniform over the origin's
    neighbor set, independently across parasites.
    """
    m = len(origins)
    if isinstance(graph, CompleteGraph):
        d = rng.integers(0, graph.size - 1, size=(m, v))
        return d + (d >= origins[:, None])

    if graph.sorted_x is not None:
        return _sample_interval(graph, origins, v, rng)
    return _sample_rejection(graph, origins, v, rng)


def _sample_interval(
    graph: GeometricGraph, origins: np.ndarray, v: int, rng: np.random.Generator
) -> np.ndarray:
    # 1-d cube: a neighbor set is a contiguous run of coordinate ranks.
    xs = graph.sorted_x
    r = graph.params.radius
    x = graph.points.positions[origins, 0]
    lo = np.searchsorted(xs, x - r, side="left")
    hi = np.searchsorted(xs, x + r, side="right")
    deg = hi - lo - 1
    isolated = deg == 0
    # float scaling beats per-row bounded integer draws by ~4x; truncation is
    # floor here, and the clip guards the sub-ulp chance that u*deg rounds up
    # to deg (isolated rows briefly hold -1 and get overwritten)
    u = rng.random((len(origins), v))
    u *= deg[:, None]
    idx = u.astype(np.int64)
    np.minimum(idx, (deg - 1)[:, None], out=idx)
    idx += lo[:, None]
    idx += idx >= graph.rank[origins][:, None]
    dest = graph.order[idx]
    dest[isolated] = -1
    return dest


def _sample_rejection(
    graph: GeometricGraph, origins: np.ndarray, v: int, rng: np.random.Generator
) -> np.ndarray:
    # Draw uniformly from the 3^n-cell candidate pool and keep draws that land
    # inside the ball; conditioned on acceptance that is uniform over the
    # neighbor set.  Stubborn slots (rare) fall back to explicit neighbor lists.
    index = graph.index
    space = graph.space
    pos = graph.points.positions
    r = graph.params.radius
    m = len(origins)

    starts, stops = index.query_ranges_batch(origins)
    lens = stops - starts
    cum = np.concatenate([np.zeros((m, 1), dtype=np.int64), np.cumsum(lens, axis=1)], axis=1)
    pool = cum[:, -1]

    dest = np.full(m * v, -1, dtype=np.int64)
    row = np.repeat(np.arange(m), v)
    active = np.flatnonzero(pool[row] > 1)
    origin_ids = origins[row]

    for _ in range(_REJECTION_ROUNDS):
        if active.size == 0:
            break
        rows_a = row[active]
        t = rng.integers(0, pool[rows_a])
        pos_idx = np.empty(active.size, dtype=np.int64)
        for j in range(lens.shape[1]):
            sel = (t >= cum[rows_a, j]) & (t < cum[rows_a, j + 1])
            if np.any(sel):
                rj = rows_a[sel]
                pos_idx[sel] = starts[rj, j] + (t[sel] - cum[rj, j])
        cand = index.ids_sorted[pos_idx]
        ok = (cand != origin_ids[active]) & _pairwise_within(
            space, pos[cand], pos[origin_ids[active]], r
        )
        dest[active[ok]] = cand[ok]
        active = active[~ok]

    if active.size:
        for o in np.unique(origin_ids[active]):
            slots = active[origin_ids[active] == o]
            nb = neighbors_within(index, int(o), r)
            if nb.size:
                dest[slots] = nb[rng.integers(0, nb.size, size=slots.size)]
    return dest.reshape(m, v)


# -- one generation ----------------------------------------------------------


def _full_mode_infections(state: EpidemicState, dest2d: np.ndarray, size: int) -> np.ndarray:
    """Susceptible targets attacked at least twice (any mix of origins)."""
    flat = dest2d[dest2d >= 0]
    if flat.size == 0:
        return np.zeros(0, dtype=np.int64)
    if flat.size * 4 >= size:
        tally = np.bincount(flat, minlength=size)
        return np.flatnonzero((tally >= 2) & (state.status == SUSCEPTIBLE)).astype(np.int64)
    values, counts = np.unique(flat, return_counts=True)
    hit_twice = values[counts >= 2]
    return hit_twice[state.status[hit_twice] == SUSCEPTIBLE]


def _count_same_origin_hits(dest2d: np.ndarray, new: np.ndarray, size: int) -> int:
    """How many of the new infections had >= 2 attackers from one origin.

    Only parasites aimed at a new infection matter, so the duplicate scan
    runs on that (small) subset rather than every brood.
    """
    if new.size == 0:
        return 0
    is_new = np.zeros(size, dtype=bool)
    is_new[new] = True
    valid = dest2d >= 0
    hits = valid & is_new[np.where(valid, dest2d, 0)]
    rows, _ = np.nonzero(hits)
    key = rows.astype(np.int64) * size + dest2d[hits]
    key.sort()
    dup = key[1:][key[1:] == key[:-1]]
    return int(np.unique(dup % size).size)


def step_generation(
    state: EpidemicState,
    params: EpidemicParams,
    rng: np.random.Generator,
    tape: DestinationTape | None = None,
) -> tuple[EpidemicState, GenerationReport]:
    """Move every parasite of the current generation, apply the infection
    rule, and roll the S/I/R partition forward (in place)."""
    if state.infected.size == 0:
        raise IllegalStateError("cannot step an extinct epidemic")
    graph = state.graph
    origins = state.infected
    v = params.parasites_per_infection

    if tape is not None:
        dest2d = tape.destinations[origins]
    else:
        dest2d = _sample_destinations(graph, origins, v, rng)

    if params.mode == MODE_FULL:
        new = _full_mode_infections(state, dest2d, graph.size)
        cosame_count = _count_same_origin_hits(dest2d, new, graph.size)
    else:
        # dynamics driven by same-origin pairs: scan each brood for duplicates
        sorted_rows = np.sort(dest2d, axis=1)
        dup = (sorted_rows[:, 1:] == sorted_rows[:, :-1]) & (sorted_rows[:, 1:] >= 0)
        cosame_targets = np.unique(sorted_rows[:, 1:][dup])
        new = cosame_targets[state.status[cosame_targets] == SUSCEPTIBLE]
        cosame_count = int(new.size)

    if isinstance(graph, GeometricGraph) and new.size:
        d = distance_to_many(graph.space, graph.points.positions[new],
                             graph.points.positions[state.origin])
        shell = int(np.max(np.floor(d / (graph.params.radius / 2.0))))
        state.max_box_distance = max(state.max_box_distance, shell)

    state.status[origins] = REMOVED
    state.removed_count += origins.size
    state.status[new] = INFECTED
    state.infected = new.astype(np.int64)
    state.cumulative += int(new.size)
    state.generation += 1

    report = GenerationReport(
        generation=state.generation,
        newly_infected=int(new.size),
        cumulative=state.cumulative,
        max_box_distance=state.max_box_distance,
        cosame_count=cosame_count,
        codiff_count=int(new.size) - cosame_count,
    )
    return state, report


def default_generation_cap(graph: Topology) -> int:
    if isinstance(graph, CompleteGraph):
        return _DEFAULT_COMPLETE_CAP
    return 10 * math.ceil(1.0 / (2.0 * graph.params.radius))


def run_to_absorption(
    state: EpidemicState,
    params: EpidemicParams,
    rng: np.random.Generator,
    tape: DestinationTape | None = None,
    on_generation=None,
) -> tuple[Outcome, list[GenerationReport]]:
    """Iterate generations until extinction, the target proportion, or the cap.

    ``on_generation(state)`` runs after each step; instrumentation like box
    coverage tracking hooks in there.
    """
    graph = state.graph
    target = params.target_proportion * graph.size
    cap = params.generation_cap if params.generation_cap is not None else default_generation_cap(graph)
    reports: list[GenerationReport] = []
    while True:
        if state.cumulative >= target:
            kind = (
                OUTCOME_FULL_INVASION
                if state.cumulative == graph.size
                else OUTCOME_TARGET_REACHED
            )
            return Outcome(kind, state.generation, state.cumulative), reports
        if state.infected.size == 0:
            return Outcome(OUTCOME_EXTINCT, state.generation, state.cumulative), reports
        if state.generation >= cap:
            return (
                Outcome(OUTCOME_CAP_EXCEEDED, state.generation, state.cumulative, state=state),
                reports,
            )
        _, report = step_generation(state, params, rng, tape=tape)
        if on_generation is not None:
            on_generation(state)
        reports.append(report)


def wavefront_distance(state: EpidemicState, graph: Topology | None = None) -> int:
    """Farthest radius/2 shell (around the origin vertex) reached by the
    infected-or-removed set.  Geometric graphs only."""
    graph = graph if graph is not None else state.graph
    if not isinstance(graph, GeometricGraph):
        raise UnsupportedTopologyError("wavefront distance needs a geometric graph")
    reached = np.flatnonzero(state.status != SUSCEPTIBLE)
    d = distance_to_many(graph.space, graph.points.positions[reached],
                         graph.points.positions[state.origin])
    return int(np.max(np.floor(d / (graph.params.radius / 2.0))))


def one_generation_extinction_prob(vertices: int, parasites: int) -> float:
    """Probability that a single infected vertex of a complete graph produces
    no infection: all parasites land on distinct targets, i.e.
    (D-1)! / ((D-1-V)! (D-1)^V).  Zero when the parasites outnumber targets."""
    if vertices < 2:
        raise InvalidArgumentError(f"need at least 2 vertices, got {vertices}")
    if parasites < 1:
        raise InvalidArgumentError(f"need at least 1 parasite, got {parasites}")
    targets = vertices - 1
    if parasites > targets:
        return 0.0
    num = 1
    for i in range(parasites):
        num *= targets - i
    return num / (targets**parasites)
