"""Numerical toolkit for decentralized bidirectional vehicle platoons.

Builds the exact closed-loop state-space model, its continuum (PDE)
approximation with a spectral Galerkin discretization, closed-form
asymptotic predictors for the slow eigenvalue branches, mistuning design
of controller gains, time-domain simulation, and H-infinity disturbance
analysis.
"""

from .model import (
    ConfigurationError,
    GainSchedule,
    MistuningProfile,
    PlatoonConfig,
    ProfileKind,
    Scenario,
    build_gain_schedule,
    config_from_dict,
    evaluate_profile,
    load_config,
)
from .statespace import (
    ClosedLoopModel,
    NumericalError,
    Spectrum,
    analyze_spectrum,
    build_closed_loop,
    eigenvalues_dense,
    spectrum_of_config,
    symmetric_spectrum_analytic,
)
from .pde import (
    Boundary,
    PdeDiscretization,
    assemble_galerkin,
    boundary_for_scenario,
    discretize_pde_fd,
    nominal_pde_eigenvalues,
    pde_spectrum,
)
from .asymptotics import (
    AsymptoticPrediction,
    mistuned_asymptote,
    optimal_profile_search,
    resonance_condition,
    symmetric_asymptote,
)
from .sim import DivergenceError, SimulationSetup, TrajectoryResult, simulate
from .robustness import HinfResult, hinf_bisection, hinf_sweep

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "Boundary",
    "ClosedLoopModel",
    "ConfigurationError",
    "DivergenceError",
    "GainSchedule",
    "HinfResult",
    "MistuningProfile",
    "NumericalError",
    "PdeDiscretization",
    "PlatoonConfig",
    "ProfileKind",
    "Scenario",
    "SimulationSetup",
    "Spectrum",
    "TrajectoryResult",
    "analyze_spectrum",
    "assemble_galerkin",
    "boundary_for_scenario",
    "build_closed_loop",
    "build_gain_schedule",
    "config_from_dict",
    "discretize_pde_fd",
    "eigenvalues_dense",
    "evaluate_profile",
    "hinf_bisection",
    "hinf_sweep",
    "load_config",
    "mistuned_asymptote",
    "nominal_pde_eigenvalues",
    "optimal_profile_search",
    "pde_spectrum",
    "resonance_condition",
    "simulate",
    "spectrum_of_config",
    "symmetric_asymptote",
    "symmetric_spectrum_analytic",
]
