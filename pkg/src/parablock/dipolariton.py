"""Dipolariton realization: Hopfield decomposition and effective constants.

Bare basis order is (photon, direct exciton, indirect exciton).  The linear
Hamiltonian is the real symmetric matrix

    [[E_C,   Omega,  0   ],
     [Omega, E_DX,  -J   ],
     [0,    -J,      E_IX]]

whose eigenvectors, as rows of V sorted by ascending energy, are the
Hopfield coefficients: V[j, k] is the weight of dipolariton j on bare mode
k.  Interaction constants follow from expanding

    H_int = alpha_D b'b'bb + alpha_I c'c'cc + alpha_DI b'c'bc      (' = dagger)

in the dipolariton basis and collecting normal-ordered coefficients; the
combinatorial weights (1 for self-Kerr, 4 for cross-density, 2 for the
parametric term) come with the expansion and are asserted in tests.

Everything in this module is in meV.  Conversion to the engine's inverse
picoseconds happens in exactly one place, :func:`rate_per_ps`; Hamiltonians
stay in meV and the engine divides them by hbar itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR_MEV_PS
from .fock import DimensionError, FockSpace, Operator, mode_annihilation
from .lindblad import DecayChannel, Liouvillian, build_liouvillian


@dataclass(frozen=True)
class DipolaritonParams:
    """Microscopic parameters; defaults are the reference operating set."""

    E_C: float = -9.0
    E_DX: float = 9.0
    E_IX: float = 0.0
    Omega: float = 6.0
    J: float = 3.0
    alpha_D: float = 0.004
    alpha_I: float = 0.016
    alpha_DI: float = 0.008
    Gamma_C: float = HBAR_MEV_PS / 2.5
    Gamma_X: float = HBAR_MEV_PS / 500.0
    psi1: complex = 50.0 + 0.0j
    F2: float = 1e-4
    E_P1: float | None = None
    E_F2: float | None = None

    def __post_init__(self):
        # zero couplings are allowed for decoupled-limit checks
        if self.Omega < 0 or self.J < 0:
            raise ValueError("couplings must be >= 0")
        if self.Gamma_C <= 0 or self.Gamma_X <= 0:
            raise ValueError("decay rates must be > 0")


@dataclass(frozen=True)
class HopfieldDecomposition:
    """Eigenenergies (ascending) and Hopfield coefficient rows."""

    energies: tuple[float, float, float]
    V: np.ndarray

    def __post_init__(self):
        if not (self.energies[0] < self.energies[1] < self.energies[2]):
            raise ValueError("eigenenergies must be strictly ascending")


@dataclass(frozen=True)
class EffectiveConstants:
    """Reduced two-mode model constants, all in meV."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float
    Gamma2: float
    Gamma3: float
    Delta1: float
    Delta2: float
    Delta3: float


def linear_matrix(params: DipolaritonParams) -> np.ndarray:
    return np.array(
        [
            [params.E_C, params.Omega, 0.0],
            [params.Omega, params.E_DX, -params.J],
            [0.0, -params.J, params.E_IX],
        ]
    )


def diagonalize_linear(params: DipolaritonParams) -> HopfieldDecomposition:
    """Hopfield decomposition with a fixed sign gauge.

    Rows are eigenvectors sorted by ascending energy; each row is flipped
    so its largest-magnitude entry is positive.  The gauge only affects the
    sign of odd-power constants (c6); observables are invariant under it.
    """
    w, vecs = np.linalg.eigh(linear_matrix(params))
    v = vecs.T.copy()
    for j in range(3):
        k = int(np.argmax(np.abs(v[j])))
        if v[j, k] < 0:
            v[j] = -v[j]
    v.flags.writeable = False
    return HopfieldDecomposition(energies=(float(w[0]), float(w[1]), float(w[2])), V=v)


def optimal_drive_energies(
    hd: HopfieldDecomposition, c1: float, c2: float, psi1: complex
) -> tuple[float, float]:
    """(E_P1, E_F2) cancelling both blue-shifted detunings.

    Solves Delta2 + c1|psi1|^2 = 0 and Delta3 + c2|psi1|^2 = 0 with
    Delta2 = E2 - E_F2 and Delta3 = E3 + E_P1 - 2 E_F2.
    """
    n1 = abs(psi1) ** 2
    e_f2 = hd.energies[1] + c1 * n1
    e_p1 = 2.0 * e_f2 - hd.energies[2] - c2 * n1
    return e_p1, e_f2


def effective_constants(
    hd: HopfieldDecomposition, params: DipolaritonParams
) -> EffectiveConstants:
    """Interaction constants, decay rates, and detunings of the reduced model.

    When params omit the drive energies, both detunings are set to their
    blue-shift-cancelling optimum.
    """
    aD, aI, aDI = params.alpha_D, params.alpha_I, params.alpha_DI
    b = hd.V[:, 1]  # direct-exciton weights per dipolariton
    g = hd.V[:, 2]  # indirect-exciton weights
    p = hd.V[:, 0]  # photon weights
    c1 = 4 * aD * b[0] ** 2 * b[1] ** 2 + 4 * aI * g[0] ** 2 * g[1] ** 2 \
        + aDI * (b[0] * g[1] + b[1] * g[0]) ** 2
    c2 = 4 * aD * b[0] ** 2 * b[2] ** 2 + 4 * aI * g[0] ** 2 * g[2] ** 2 \
        + aDI * (b[0] * g[2] + b[2] * g[0]) ** 2
    c3 = aD * b[1] ** 4 + aI * g[1] ** 4 + aDI * b[1] ** 2 * g[1] ** 2
    c4 = aD * b[2] ** 4 + aI * g[2] ** 4 + aDI * b[2] ** 2 * g[2] ** 2
    c5 = 4 * aD * b[1] ** 2 * b[2] ** 2 + 4 * aI * g[1] ** 2 * g[2] ** 2 \
        + aDI * (b[1] * g[2] + b[2] * g[1]) ** 2
    c6 = 2 * aD * b[1] ** 2 * b[0] * b[2] + 2 * aI * g[1] ** 2 * g[0] * g[2] \
        + aDI * b[1] * g[1] * (b[0] * g[2] + b[2] * g[0])
    gamma2 = p[1] ** 2 * params.Gamma_C + (b[1] ** 2 + g[1] ** 2) * params.Gamma_X
    gamma3 = p[2] ** 2 * params.Gamma_C + (b[2] ** 2 + g[2] ** 2) * params.Gamma_X
    if params.E_P1 is None or params.E_F2 is None:
        e_p1, e_f2 = optimal_drive_energies(hd, c1, c2, params.psi1)
    else:
        e_p1, e_f2 = params.E_P1, params.E_F2
    return EffectiveConstants(
        c1=c1,
        c2=c2,
        c3=c3,
        c4=c4,
        c5=c5,
        c6=c6,
        Gamma2=gamma2,
        Gamma3=gamma3,
        Delta1=hd.energies[0] - e_p1,
        Delta2=hd.energies[1] - e_f2,
        Delta3=hd.energies[2] + e_p1 - 2.0 * e_f2,
    )


def build_effective_hamiltonian(
    ec: EffectiveConstants, psi1: complex, F2: float, space: FockSpace
) -> Operator:
    """Reduced two-mode Hamiltonian (meV), modes ordered (A2, A3)."""
    if space.n_modes != 2:
        raise DimensionError("effective model needs a two-mode space (A2, A3)")
    a2 = mode_annihilation(space, 0)
    a3 = mode_annihilation(space, 1)
    a2m, a3m = a2.matrix, a3.matrix
    a2d, a3d = a2m.conj().T, a3m.conj().T
    n1 = abs(psi1) ** 2
    pair = a2d @ a2d @ a3m * psi1
    h = (
        (ec.Delta2 + ec.c1 * n1) * (a2d @ a2m)
        + (ec.Delta3 + ec.c2 * n1) * (a3d @ a3m)
        + ec.c3 * (a2d @ a2d @ a2m @ a2m)
        + ec.c4 * (a3d @ a3d @ a3m @ a3m)
        + ec.c5 * (a2d @ a3d @ a2m @ a3m)
        + ec.c6 * (pair + pair.conj().T)
        + F2 * (a2d + a2m)
    )
    return Operator(space, h)


def single_mode_blockade_reference(
    ec: EffectiveConstants, F2: float, space: FockSpace
) -> Operator:
    """Conventional-blockade baseline: Kerr mode A2 alone, zero detuning."""
    if space.n_modes != 1:
        raise DimensionError("baseline needs a single-mode space")
    a2 = mode_annihilation(space, 0)
    a2m = a2.matrix
    a2d = a2m.conj().T
    h = ec.c3 * (a2d @ a2d @ a2m @ a2m) + F2 * (a2d + a2m)
    return Operator(space, h)


def rate_per_ps(gamma_mev: float) -> float:
    """The single meV -> 1/ps conversion used for decay rates."""
    return gamma_mev / HBAR_MEV_PS


def decay_channels(ec: EffectiveConstants, space: FockSpace) -> list[DecayChannel]:
    """Engine-ready channels for the reduced model (rates in 1/ps)."""
    if space.n_modes != 2:
        raise DimensionError("reduced model needs a two-mode space")
    return [
        DecayChannel(mode_annihilation(space, 0), rate_per_ps(ec.Gamma2)),
        DecayChannel(mode_annihilation(space, 1), rate_per_ps(ec.Gamma3)),
    ]


def build_dipolariton_liouvillian(
    ec: EffectiveConstants, psi1: complex, F2: float, space: FockSpace
) -> Liouvillian:
    """Liouvillian of the reduced model in 1/ps units."""
    h = build_effective_hamiltonian(ec, psi1, F2, space)
    return build_liouvillian(h, decay_channels(ec, space), hbar=HBAR_MEV_PS)
