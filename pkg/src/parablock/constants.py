"""Shared physical constants and numerical tolerances.

Every solver and every test reads tolerances from the single record below,
so a change here propagates consistently.
"""

from __future__ import annotations

from dataclasses import dataclass

#: Reduced Planck constant in meV*ps; converts meV energies to 1/ps rates.
HBAR_MEV_PS = 0.6582119569

#: Default per-mode truncation for the two quantum modes (n_max; dim = n_max+1).
DEFAULT_N2_MAX = 5
DEFAULT_N3_MAX = 5


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by solvers and the test suite."""

    #: max elementwise |rho - rho^dagger| allowed for a density matrix
    hermiticity: float = 1e-10
    #: |trace(rho) - 1| allowed for a density matrix
    trace: float = 1e-9
    #: eigenvalues of rho may dip to this floor (truncation/solver slack)
    positivity_floor: float = -1e-8
    #: infinity-norm residual ||L vec(rho_ss)|| for an accepted steady state
    steady_residual: float = 1e-9
    #: relative tolerance of the adaptive time integrator
    evolve_rtol: float = 1e-8
    #: absolute tolerance of the adaptive time integrator
    evolve_atol: float = 1e-10
    #: trace drift beyond which evolve() renormalizes and reports
    trace_drift: float = 1e-8
    #: occupations at or below this make g2 undefined (ratio would be noise)
    g2_occupation_floor: float = 1e-12


TOL = Tolerances()
