"""Three-mode parametric system: mean-field reduction and the two-mode model.

All quantities are dimensionless, in units of a reference kappa.  The pumped
lowest mode is eliminated classically: its steady amplitude multiplies the
bare parametric constant, alpha = alpha0 sqrt(n1), and the remaining two
quantum modes see detunings

    Delta1 = E1 - E_P1,  Delta2 = E2 - E_F2,  Delta3 = E3 + E_P1 - 2 E_F2.

Mean-field equations (factorized expectations of the full three-mode model,
with the parametric term alpha0 (a2^dag a2^dag a3 a1 + h.c.) and drives
P1 e^{-i E_P1 t} on mode 1, F2 e^{-i E_F2 t} on mode 2, written in the
rotating frame that removes both drive frequencies):

    i da1/dt = (Delta1 - i kappa1/2) a1 + alpha0 conj(a3) a2^2 + P1
    i da2/dt = (Delta2 - i kappa2/2) a2 + 2 alpha0 conj(a2) a1 a3 + F2
    i da3/dt = (Delta3 - i kappa3/2) a3 + alpha0 conj(a1) a2^2

Each nonlinear term is d/d(conj(a_i)) of alpha0 (conj(a2)^2 a3 a1 + c.c.).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .constants import TOL
from .fock import DimensionError, FockSpace, Operator, mode_annihilation
from .lindblad import SolverError, TimeTrace


@dataclass(frozen=True)
class GenericModelParams:
    """Every symbol of the three-mode Hamiltonian, in kappa units."""

    E1: float
    E2: float
    E3: float
    E_P1: float
    E_F2: float
    alpha0: float
    P1: float
    F2: float
    kappa1: float = 1.0
    kappa2: float = 1.0
    kappa3: float = 1.0

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "kappa3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.P1 < 0 or self.F2 < 0:
            raise ValueError("drive amplitudes must be >= 0")


@dataclass(frozen=True)
class ReducedParams:
    """Two-mode model parameters after mean-field elimination of mode 1."""

    Delta2: float
    Delta3: float
    alpha: float
    F2: float
    kappa2: float = 1.0
    kappa3: float = 1.0
    # provenance of the elimination
    Delta1: float = 0.0
    n1: float = 1.0

    @classmethod
    def from_generic(cls, gp: GenericModelParams) -> "ReducedParams":
        d1 = gp.E1 - gp.E_P1
        n1 = mean_field_occupation(gp.P1, d1, gp.kappa1)
        return cls(
            Delta2=gp.E2 - gp.E_F2,
            Delta3=gp.E3 + gp.E_P1 - 2.0 * gp.E_F2,
            alpha=gp.alpha0 * np.sqrt(n1),
            F2=gp.F2,
            kappa2=gp.kappa2,
            kappa3=gp.kappa3,
            Delta1=d1,
            n1=n1,
        )


def mean_field_occupation(P1: float, Delta1: float, kappa1: float) -> float:
    """Lorentzian steady occupation of the driven lowest mode."""
    if kappa1 <= 0:
        raise ValueError("kappa1 must be > 0")
    return P1**2 / (Delta1**2 + (kappa1 / 2.0) ** 2)


def mean_field_dynamics(
    params: GenericModelParams,
    t_grid: np.ndarray,
    rtol: float = TOL.evolve_rtol,
    atol: float = TOL.evolve_atol,
) -> TimeTrace:
    """Integrate the classical amplitude equations from vacuum.

    Columns: re/im of each amplitude plus the occupations |a_i|^2.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must contain at least two increasing times")
    d1 = params.E1 - params.E_P1
    d2 = params.E2 - params.E_F2
    d3 = params.E3 + params.E_P1 - 2.0 * params.E_F2
    pole1 = d1 - 0.5j * params.kappa1
    pole2 = d2 - 0.5j * params.kappa2
    pole3 = d3 - 0.5j * params.kappa3
    a0 = params.alpha0

    def rhs(_t, y):
        a1, a2, a3 = y
        da1 = -1j * (pole1 * a1 + a0 * np.conj(a3) * a2**2 + params.P1)
        da2 = -1j * (pole2 * a2 + 2.0 * a0 * np.conj(a2) * a1 * a3 + params.F2)
        da3 = -1j * (pole3 * a3 + a0 * np.conj(a1) * a2**2)
        return [da1, da2, da3]

    sol = solve_ivp(
        rhs,
        (t_grid[0], t_grid[-1]),
        np.zeros(3, dtype=complex),
        t_eval=t_grid,
        method="RK45",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise SolverError(f"mean-field integration failed: {sol.message}")
    a1, a2, a3 = sol.y
    return TimeTrace(
        times=t_grid,
        observables={
            "re_a1": a1.real, "im_a1": a1.imag, "n1": np.abs(a1) ** 2,
            "re_a2": a2.real, "im_a2": a2.imag, "n2": np.abs(a2) ** 2,
            "re_a3": a3.real, "im_a3": a3.imag, "n3": np.abs(a3) ** 2,
        },
    )


def build_reduced_hamiltonian(rp: ReducedParams, space: FockSpace) -> Operator:
    """H' = Delta2 n2 + Delta3 n3 + alpha(a2^dag a2^dag a3 + h.c.) + F2(a2^dag + a2)."""
    if space.n_modes != 2:
        raise DimensionError("reduced model needs a two-mode space (mode 2, mode 3)")
    a2 = mode_annihilation(space, 0)
    a3 = mode_annihilation(space, 1)
    n2 = a2.dagger().matrix @ a2.matrix
    n3 = a3.dagger().matrix @ a3.matrix
    pair = a2.dagger().matrix @ a2.dagger().matrix @ a3.matrix
    h = (
        rp.Delta2 * n2
        + rp.Delta3 * n3
        + rp.alpha * (pair + pair.conj().T)
        + rp.F2 * (a2.dagger().matrix + a2.matrix)
    )
    return Operator(space, h)


def analytic_g2(alpha: float, kappa: float) -> float:
    """Weak-pump equal-time coherence of mode 2 at zero detunings."""
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    x = (alpha / kappa) ** 2
    return 1.0 / (1.0 + 8.0 * x + 16.0 * x**2)
