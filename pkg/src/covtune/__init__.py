"""Iterative background error covariance tuning for variational data assimilation."""

from .assimilation import (
    AssimilationProblem,
    IterativeState,
    Method,
    TuningConfig,
    apply_schedule,
    blue_analysis,
    kalman_gain,
    run_iterative,
)
from .spd import CorrelationKernel, KernelKind, airm_distance
from .tracker import ExactTrace, track_exact
from .twin import DynamicChainConfig, NoiseModel, TwinConfig, run_dynamic_chain, run_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "AssimilationProblem",
    "CorrelationKernel",
    "DynamicChainConfig",
    "ExactTrace",
    "IterativeState",
    "KernelKind",
    "Method",
    "NoiseModel",
    "TuningConfig",
    "TwinConfig",
    "airm_distance",
    "apply_schedule",
    "blue_analysis",
    "kalman_gain",
    "run_dynamic_chain",
    "run_iterative",
    "run_monte_carlo",
    "track_exact",
]
