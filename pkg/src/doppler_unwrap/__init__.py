"""Velocity estimation from wrapped multiband phase differences of opportunistic packets."""

__version__ = "0.1.0"

from .model import (
    SPEED_OF_LIGHT,
    Band,
    BandSet,
    KinematicState,
    doppler_frequency,
    max_anchor_tdoa,
    max_unambiguous_velocity,
    pair_count,
    velocity_resolution,
    wrap_phase,
)
from .measurements import MeasurementSystem, build_system
from .solver import IlsProblem, IlsSolution, solve_exact
from .benchmarks import ImlOptions, solve_iml, solve_single_band
from .estimators import IterativeMaxLikelihoodEstimator, MultibandVelocityEstimator
from .experiments import (
    BoxplotStats,
    ExperimentConfig,
    TrialRecord,
    emit_results,
    run_experiment,
    run_trial,
    summarize,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "Band",
    "BandSet",
    "BoxplotStats",
    "ExperimentConfig",
    "IlsProblem",
    "IlsSolution",
    "ImlOptions",
    "IterativeMaxLikelihoodEstimator",
    "KinematicState",
    "MeasurementSystem",
    "MultibandVelocityEstimator",
    "TrialRecord",
    "build_system",
    "doppler_frequency",
    "emit_results",
    "max_anchor_tdoa",
    "max_unambiguous_velocity",
    "pair_count",
    "run_experiment",
    "run_trial",
    "solve_exact",
    "solve_iml",
    "solve_single_band",
    "summarize",
    "velocity_resolution",
    "wrap_phase",
    "__version__",
]
