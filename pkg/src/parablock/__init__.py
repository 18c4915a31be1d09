"""Photon blockade in weakly nonlinear three-mode parametric systems.

Truncated-Fock Lindblad solvers plus the generic and dipolariton model
builders, with an experiment runner for the standard sweep figures.
"""

__version__ = "0.1.0"

from .constants import HBAR_MEV_PS, TOL, Tolerances
from .fock import (
    DensityMatrix,
    DimensionError,
    FockSpace,
    Operator,
    SpaceMismatchError,
    StateValidationError,
    annihilation,
    creation,
    embed,
    expectation,
    identity,
    mode_annihilation,
)
from .lindblad import (
    DecayChannel,
    DegenerateSteadyStateError,
    Liouvillian,
    SolverError,
    TimeTrace,
    UndefinedCorrelationError,
    build_liouvillian,
    evolve,
    g2_equal_time,
    g2_observable,
    g2_two_time,
    steady_residual,
    steady_state,
    unvectorize,
    vectorize,
)

__all__ = [
    "HBAR_MEV_PS",
    "TOL",
    "Tolerances",
    "DensityMatrix",
    "DimensionError",
    "FockSpace",
    "Operator",
    "SpaceMismatchError",
    "StateValidationError",
    "annihilation",
    "creation",
    "embed",
    "expectation",
    "identity",
    "mode_annihilation",
    "DecayChannel",
    "DegenerateSteadyStateError",
    "Liouvillian",
    "SolverError",
    "TimeTrace",
    "UndefinedCorrelationError",
    "build_liouvillian",
    "evolve",
    "g2_equal_time",
    "g2_observable",
    "g2_two_time",
    "steady_residual",
    "steady_state",
    "unvectorize",
    "vectorize",
]
