"""coopsim: stochastic invasion of cooperative parasites in structured host populations."""

from .dbpc import (
    DbpcParams,
    DbpcState,
    PoissonLaw,
    SurvivalEstimate,
    TableLaw,
    dbpc_step,
    estimate_survival,
    initial_state,
    poisson_dbpc,
    truncated_reweighted_law,
)
from .epidemic import (
    CompleteGraph,
    DestinationTape,
    EpidemicParams,
    EpidemicState,
    GenerationReport,
    Outcome,
    build_complete_graph,
    draw_destination_tape,
    init_epidemic,
    one_generation_extinction_prob,
    run_to_absorption,
    step_generation,
    wavefront_distance,
)
from .experiments import (
    CompleteSpace,
    ExperimentConfig,
    InvasionTimePrediction,
    SweepRow,
    dbpc_survival_sweep,
    invasion_probability_sweep,
    invasion_time_experiment,
    load_config,
    replicate_stream,
    validate_graph,
    wavefront_experiment,
)
from .geometry import Cube, PointSet, Sphere2, distance, sample_point_set
from .rgg import (
    GeometricGraph,
    RggParams,
    build_rgg,
    closest_to_center,
    degree,
    degree_stats,
    is_connected,
)
from .spatial_index import GridIndex, build_index, neighbors_within

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
