"""Birth-death evolving network simulator and exact-analysis toolkit.

Individuals arrive by a Poisson process, attach to m existing individuals
(uniformly or by degree), live an exponential lifetime, and carry one of
two labels updated at arrival by drift contagion or fitness-proportional
selection. The package pairs the Monte Carlo engine with closed forms and
exact chain solvers so every headline number can be cross-checked.
"""

from .dynamics import (
    DriftParams,
    Outcome,
    PayoffMatrix,
    SelectionParams,
    classify,
    drift_update,
    fitness_of,
    payoff_of,
    selection_update,
    similarity_attraction,
)
from .engine import (
    CompleteInit,
    EdgeListInit,
    Event,
    PopulationState,
    SimParams,
    StopRule,
    apply_birth,
    apply_death,
    init_state,
    run_trajectory,
    sample_next_event,
)
from .experiments import (
    DEFAULT_EVENT_LIMIT,
    FixationEstimate,
    ReplicateOutcome,
    SweepSpec,
    derive_seed,
    estimate_fixation,
    run_replicate,
    run_sweep,
    stationary_statistics,
    trajectory_series,
)
from .graph import DynamicGraph
from .config import RunConfig, parse_config
from .io import load_edge_list

__version__ = "0.1.0"

__all__ = [
    "CompleteInit", "DEFAULT_EVENT_LIMIT", "DriftParams", "DynamicGraph",
    "EdgeListInit", "Event", "FixationEstimate", "Outcome", "PayoffMatrix",
    "PopulationState", "ReplicateOutcome", "RunConfig", "SelectionParams",
    "SimParams", "StopRule", "SweepSpec", "apply_birth", "apply_death",
    "classify", "derive_seed", "drift_update", "estimate_fixation",
    "fitness_of", "init_state", "load_edge_list", "parse_config",
    "payoff_of", "run_replicate", "run_sweep", "run_trajectory",
    "sample_next_event", "selection_update", "similarity_attraction",
    "stationary_statistics", "trajectory_series",
]
