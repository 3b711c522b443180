"""Distributed nonsmooth convex optimization with random constraint projections.

A simulator and library for networks of users that cooperatively
minimize the sum of private weighted-L1 objectives over the
intersection of private ball constraints, by mixing neighbor estimates
with doubly stochastic weights and combining proximal or subgradient
steps with projections onto randomly selected constraint components.
"""

from .convex import (
    Ball,
    StepSizeSchedule,
    WeightedL1,
    ball_project,
    l1_eval,
    l1_prox,
    l1_subgradient,
    prox_characterization_holds,
    project_rows,
    soft_threshold,
)
from .engine import (
    AlgorithmKind,
    AlgorithmState,
    ProblemInstance,
    initial_state,
    proximal_round,
    run,
    subgradient_round,
)
from .errors import ConfigurationError, FeasibilityError, InputError
from .config import ExperimentConfig, load_config, save_config
from .harness import (
    OracleSolution,
    centralized_oracle,
    compare_schedules,
    generate_instance,
    instance_fingerprint,
    run_experiment,
    validate_setup,
)
from .metrics import (
    MetricsRecord,
    approx_distance_to_intersection,
    consensus_diameter,
    feasibility_measure,
    group_aggregates,
    group_members,
    mean_point,
    objective_measure,
)
from .network import (
    Topology,
    WeightMatrix,
    build_ring_of_cliques,
    check_strong_connectivity,
    mix,
    mix_all,
    ring_clique_weights,
    validate_weights,
)
from .sampling import ConstraintPartition, RngStream, sample_constraint

__version__ = "0.1.0"
