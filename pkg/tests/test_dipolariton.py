"""Dipolariton pipeline: Hopfield decomposition, effective constants, builders.

The interaction constants are cross-checked against an independent oracle:
the bare quartic Hamiltonian is expanded literally on a three-dipolariton
Fock space and the coefficients are read off matrix elements.  That pins
the combinatorial factors without trusting the closed-form expressions.
"""

import numpy as np
import pytest

from parablock.constants import HBAR_MEV_PS
from parablock.dipolariton import (
    DipolaritonParams,
    EffectiveConstants,
    build_dipolariton_liouvillian,
    build_effective_hamiltonian,
    decay_channels,
    diagonalize_linear,
    effective_constants,
    linear_matrix,
    optimal_drive_energies,
    rate_per_ps,
    single_mode_blockade_reference,
)
from parablock.fock import FockSpace, mode_annihilation
from parablock.generic import ReducedParams, build_reduced_hamiltonian
from parablock.lindblad import g2_equal_time, steady_state, build_liouvillian, DecayChannel


def zero_detuned(ec, **overrides):
    fields = dict(
        c1=ec.c1, c2=ec.c2, c3=ec.c3, c4=ec.c4, c5=ec.c5, c6=ec.c6,
        Gamma2=ec.Gamma2, Gamma3=ec.Gamma3, Delta1=0.0, Delta2=0.0, Delta3=0.0,
    )
    fields.update(overrides)
    return EffectiveConstants(**fields)


# ------------------------------------------------------------- decomposition


def test_decoupled_limit_is_permutation():
    p = DipolaritonParams(Omega=0.0, J=0.0)
    hd = diagonalize_linear(p)
    assert hd.energies == pytest.approx((-9.0, 0.0, 9.0))
    perm = np.zeros((3, 3))
    perm[0, 0] = perm[1, 2] = perm[2, 1] = 1.0  # photon, IX, DX by energy
    assert np.allclose(hd.V, perm, atol=1e-14)


def test_no_tunneling_decouples_indirect():
    hd = diagonalize_linear(DipolaritonParams(J=0.0))
    rows = [np.allclose(np.abs(hd.V[j]), [0, 0, 1], atol=1e-12) for j in range(3)]
    assert sum(rows) == 1


def test_orthogonality_and_reconstruction():
    p = DipolaritonParams()
    hd = diagonalize_linear(p)
    assert np.max(np.abs(hd.V @ hd.V.T - np.eye(3))) < 1e-10
    rebuilt = hd.V.T @ np.diag(hd.energies) @ hd.V
    assert np.max(np.abs(rebuilt - linear_matrix(p))) < 1e-10
    # unitarity column sums
    assert np.allclose((hd.V**2).sum(axis=0), 1.0, atol=1e-12)


def test_sign_gauge_largest_entry_positive():
    hd = diagonalize_linear(DipolaritonParams())
    for j in range(3):
        assert hd.V[j, np.argmax(np.abs(hd.V[j]))] > 0


# ---------------------------------------------------------------- constants


def quartic_oracle(params):
    """Expand the bare interaction on a dipolariton Fock space and read off
    every constant from matrix elements, independent of the closed forms."""
    hd = diagonalize_linear(params)
    space = FockSpace((3, 3, 3))
    modes = [mode_annihilation(space, j).matrix for j in range(3)]
    b = sum(hd.V[j, 1] * modes[j] for j in range(3))
    c = sum(hd.V[j, 2] * modes[j] for j in range(3))
    h_int = (
        params.alpha_D * b.conj().T @ b.conj().T @ b @ b
        + params.alpha_I * c.conj().T @ c.conj().T @ c @ c
        + params.alpha_DI * b.conj().T @ c.conj().T @ b @ c
    )

    def elem(bra, ket):
        return h_int[space.index(bra), space.index(ket)]

    return dict(
        c1=elem((1, 1, 0), (1, 1, 0)).real,
        c2=elem((1, 0, 1), (1, 0, 1)).real,
        c3=elem((0, 2, 0), (0, 2, 0)).real / 2.0,
        c4=elem((0, 0, 2), (0, 0, 2)).real / 2.0,
        c5=elem((0, 1, 1), (0, 1, 1)).real,
        c6=elem((0, 2, 0), (1, 0, 1)).real / np.sqrt(2.0),
    )


def test_constants_match_quartic_oracle():
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    oracle = quartic_oracle(p)
    for name in ("c1", "c2", "c3", "c4", "c5", "c6"):
        assert getattr(ec, name) == pytest.approx(oracle[name], abs=1e-12), name


def test_constants_reference_values():
    """The four reference constants that pin the decomposition."""
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    assert ec.c3 == pytest.approx(0.0143, abs=1e-4)
    assert ec.c4 == pytest.approx(0.0035, abs=1e-4)
    assert ec.Gamma2 == pytest.approx(0.0072, abs=1e-4)
    assert ec.Gamma3 == pytest.approx(0.0207, abs=1e-4)


def test_constants_vanish_without_interactions():
    p = DipolaritonParams(alpha_D=0.0, alpha_I=0.0, alpha_DI=0.0)
    ec = effective_constants(diagonalize_linear(p), p)
    assert (ec.c1, ec.c2, ec.c3, ec.c4, ec.c5, ec.c6) == (0.0,) * 6


def test_identity_decomposition_degenerates_to_pure_kerr():
    # energies already ordered photon < DX < IX so V is exactly identity
    p = DipolaritonParams(E_C=-9.0, E_DX=0.0, E_IX=9.0, Omega=0.0, J=0.0)
    hd = diagonalize_linear(p)
    assert np.allclose(hd.V, np.eye(3), atol=1e-14)
    ec = effective_constants(hd, p)
    assert ec.c6 == 0.0
    assert ec.c3 == pytest.approx(p.alpha_D)  # single-permutation self-Kerr
    assert ec.c4 == pytest.approx(p.alpha_I)
    assert ec.c1 == ec.c2 == 0.0


def test_decay_rates_interpolate():
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    for g in (ec.Gamma2, ec.Gamma3):
        assert p.Gamma_X <= g <= p.Gamma_C


def test_optimal_drive_energies_cancel_blue_shifts():
    p = DipolaritonParams()
    hd = diagonalize_linear(p)
    ec = effective_constants(hd, p)
    n1 = abs(p.psi1) ** 2
    assert ec.Delta2 + ec.c1 * n1 == pytest.approx(0.0, abs=1e-12)
    assert ec.Delta3 + ec.c2 * n1 == pytest.approx(0.0, abs=1e-12)
    e_p1, e_f2 = optimal_drive_energies(hd, ec.c1, ec.c2, p.psi1)
    assert ec.Delta1 == pytest.approx(hd.energies[0] - e_p1)
    assert ec.Delta2 == pytest.approx(hd.energies[1] - e_f2)


# ----------------------------------------------------------------- builders


def test_effective_hamiltonian_single_excitation_block():
    p = DipolaritonParams()
    ec = zero_detuned(effective_constants(diagonalize_linear(p), p), c3=0.0)
    space = FockSpace((3, 3))
    h = build_effective_hamiltonian(ec, psi1=0.0, F2=0.0, space=space).matrix
    for bra in ((0, 0), (1, 0), (0, 1)):
        for ket in ((0, 0), (1, 0), (0, 1)):
            assert h[space.index(bra), space.index(ket)] == 0.0


def test_effective_hamiltonian_blue_shift():
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    space = FockSpace((3, 3))
    h = build_effective_hamiltonian(ec, psi1=p.psi1, F2=0.0, space=space).matrix
    k = space.index((1, 0))
    n1 = abs(p.psi1) ** 2
    assert h[k, k].real == pytest.approx(ec.Delta2 + ec.c1 * n1)


def test_effective_hamiltonian_parametric_element():
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    space = FockSpace((4, 3))
    h = build_effective_hamiltonian(ec, psi1=p.psi1, F2=0.0, space=space).matrix
    val = h[space.index((0, 1)), space.index((2, 0))]
    assert val == pytest.approx(np.sqrt(2.0) * ec.c6 * p.psi1)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_mapping_to_generic_model():
    """With only c6 kept, the effective model is the generic one, alpha = c6 psi1."""
    p = DipolaritonParams()
    ec = zero_detuned(
        effective_constants(diagonalize_linear(p), p),
        c1=0.0, c2=0.0, c3=0.0, c4=0.0, c5=0.0,
        Delta2=-0.11, Delta3=0.23,
    )
    space = FockSpace((5, 4))
    psi1 = 50.0
    f2 = 3e-4
    h_dpl = build_effective_hamiltonian(ec, psi1=psi1, F2=f2, space=space).matrix
    rp = ReducedParams(Delta2=-0.11, Delta3=0.23, alpha=ec.c6 * psi1, F2=f2)
    h_gen = build_reduced_hamiltonian(rp, space).matrix
    assert np.max(np.abs(h_dpl - h_gen)) < 1e-13


def test_single_mode_reference_coherent_limit():
    p = DipolaritonParams()
    ec = zero_detuned(effective_constants(diagonalize_linear(p), p), c3=0.0)
    space = FockSpace((18,))
    h = single_mode_blockade_reference(ec, F2=0.001, space=space)
    lv = build_liouvillian(
        h, [DecayChannel(mode_annihilation(space, 0), rate_per_ps(ec.Gamma2))],
        hbar=HBAR_MEV_PS,
    )
    rho = steady_state(lv)
    assert g2_equal_time(rho, mode_annihilation(space, 0)) == pytest.approx(1.0, abs=1e-6)


def test_single_mode_reference_weak_drive_plateau():
    """Kerr blockade baseline saturates as the probe power goes to zero."""
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    space = FockSpace((8,))
    vals = []
    for frac in (0.01, 0.005):
        h = single_mode_blockade_reference(ec, F2=frac * ec.Gamma2, space=space)
        lv = build_liouvillian(
            h, [DecayChannel(mode_annihilation(space, 0), rate_per_ps(ec.Gamma2))],
            hbar=HBAR_MEV_PS,
        )
        vals.append(g2_equal_time(steady_state(lv), mode_annihilation(space, 0)))
    assert vals[0] == pytest.approx(vals[1], rel=1e-3)
    assert vals[0] < 0.1  # c3/Gamma2 ~ 2: strong conventional blockade


def test_units_conversion():
    assert rate_per_ps(HBAR_MEV_PS) == pytest.approx(1.0)
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    # middle-branch lifetime hbar/Gamma2 is around 92 ps
    assert HBAR_MEV_PS / ec.Gamma2 == pytest.approx(92.0, rel=0.01)
    space = FockSpace((4, 4))
    ch = decay_channels(ec, space)
    assert ch[0].rate == pytest.approx(ec.Gamma2 / HBAR_MEV_PS)
    assert ch[1].rate == pytest.approx(ec.Gamma3 / HBAR_MEV_PS)


def test_operating_point_antibunching():
    """Steady state at the optimum: strong antibunching at weak probe."""
    p = DipolaritonParams()
    ec = effective_constants(diagonalize_linear(p), p)
    space = FockSpace((6, 6))
    lv = build_dipolariton_liouvillian(ec, p.psi1, F2=1e-4, space=space)
    rho = steady_state(lv)
    rho.validate()
    g2 = g2_equal_time(rho, mode_annihilation(space, 0))
    assert g2 < 0.1
