"""Adaptive quantum state, detector and process tomography.

Simulation library for tomography with provably optimal O(1/N) infidelity
scaling: least-squares reconstruction, physical projections, two-step
adaptive state/detector protocols, three-step adaptive ancilla-assisted
process tomography, the distortion-free fidelity family, and a seeded
Monte-Carlo harness that measures infidelity-versus-copies scaling.
"""

from . import estimators, fidelity, linalg, measurement, quantum_objects
from .experiments import (
    ExperimentConfig,
    builtin_target,
    emit_results,
    fit_loglog_slope,
    gm_bound,
    run_scaling,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "builtin_target",
    "emit_results",
    "estimators",
    "fidelity",
    "fit_loglog_slope",
    "gm_bound",
    "linalg",
    "measurement",
    "quantum_objects",
    "run_scaling",
]
