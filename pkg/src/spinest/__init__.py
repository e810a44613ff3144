"""Estimating qubit spin expectation values from a finite number of copies."""

from .analytic import (
    STRATEGIES,
    ErrorQuery,
    bayes_joint_error,
    bayes_single_error,
    crossover_angle,
    three_observable_error,
    two_observable_error,
)
from .bloch import (
    BlochVector,
    SphereAverageSpec,
    angle_between,
    average_over_sphere,
    expectation,
    sample_pure_state,
    trace_distance,
)
from .estimators import EstimatorSpec, OutcomeCounts
from .montecarlo import ErrorReport, TrialPlan, run_trials, simulate_counts
from .povm import (
    Effect,
    Povm,
    SharpnessTriple,
    joint_povm_three,
    joint_povm_two,
    optimal_sharpness_pair,
    projective_povm,
    validate_povm,
)
from .rng import derive_substream

__version__ = "0.1.0"
