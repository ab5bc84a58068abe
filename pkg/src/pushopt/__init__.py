"""Distributed online constrained optimization over time-varying directed
networks, with value-only (bandit) and explicit-subgradient updates, mass
rescaling against unbalanced mixing, and a dynamic-regret benchmark harness.
"""

__version__ = "0.1.0"

from .benchmark import (
    PerronDiagnostic,
    RegretReport,
    SolverBudget,
    aggregate,
    clairvoyant_costs,
    clairvoyant_iterative,
    clairvoyant_quartic,
    disagreement_curve,
    dynamic_regret,
    estimate_perron,
    path_variation,
    perron_from_products,
)
from .config import ExperimentConfig, load
from .costs import (
    OnlineCost,
    SmoothingParams,
    sample_ball_batch,
    sample_sphere,
    sample_sphere_batch,
    zo_gradient,
    zo_gradient_batch,
)
from .engine import NetworkState, RunConfig, Trajectory, round_subgradient, round_zo, run, trial_rngs
from .exceptions import ConfigError, InvariantViolation, SolverNonConvergence
from .experiments import run_experiment, run_trial, sweep, validate
from .graphs import (
    Digraph,
    GraphSchedule,
    WeightMatrix,
    build_column_stochastic,
    build_row_stochastic,
    check_joint_connectivity,
    complete_digraph,
    random_strongly_connected,
    ring_digraph,
)
from .problems import quartic_suite, sparse_suite, tracking_suite
from .sets import Ball, Box
