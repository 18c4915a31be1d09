"""Fock-space primitives: ladder algebra, embedding, expectations."""

import numpy as np
import pytest

from parablock.fock import (
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

RNG = np.random.default_rng(20260816)


def test_annihilation_two_level():
    a = annihilation(2)
    assert np.array_equal(a.matrix, np.array([[0, 1], [0, 0]], dtype=complex))


def test_annihilation_sqrt_rule():
    a = annihilation(3).matrix
    assert a[0, 1] == 1.0
    assert a[1, 2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(a) == 2


def test_number_operator_diagonal():
    a = annihilation(4)
    n = (a.dagger() @ a).matrix
    # (sqrt n)^2 lands within one ulp of n
    assert np.allclose(n, np.diag([0.0, 1.0, 2.0, 3.0]), atol=1e-14)
    assert np.array_equal(n - np.diag(np.diag(n)), np.zeros((4, 4)))


def test_annihilation_rejects_trivial_dim():
    with pytest.raises(DimensionError):
        annihilation(1)


def test_creation_is_dagger_of_annihilation():
    assert np.array_equal(creation(5).matrix, annihilation(5).matrix.conj().T)


def test_embed_identity_any_index():
    space = FockSpace((3, 4))
    for k in range(2):
        emb = embed(identity(FockSpace((space.mode_dims[k],))), k, space)
        assert np.array_equal(emb.matrix, np.eye(12))


def test_embed_slow_first_ordering():
    # dims (2,2): a on mode 0 acts on the slow index, entries (0,2) and (1,3)
    space = FockSpace((2, 2))
    emb = embed(annihilation(2), 0, space).matrix
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 2] = 1.0
    expected[1, 3] = 1.0
    assert np.array_equal(emb, expected)


def test_embedded_modes_commute():
    space = FockSpace((3, 3))
    a2 = mode_annihilation(space, 0)
    a3 = mode_annihilation(space, 1)
    comm = a2.matrix @ a3.matrix - a3.matrix @ a2.matrix
    assert np.max(np.abs(comm)) == 0.0
    cross = a2.matrix @ a3.dagger().matrix - a3.dagger().matrix @ a2.matrix
    assert np.max(np.abs(cross)) == 0.0


def test_embed_dimension_mismatch():
    with pytest.raises(DimensionError):
        embed(annihilation(3), 0, FockSpace((2, 2)))
    with pytest.raises(DimensionError):
        embed(annihilation(2), 2, FockSpace((2, 2)))


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_commutator_identity_off_top_level(dim):
    """[a, adag] = I exactly, except the truncation-broken highest level."""
    a = annihilation(dim).matrix
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(comm[: dim - 1, : dim - 1], np.eye(dim - 1), atol=1e-14)
    # the breakage is confined to the last diagonal entry
    assert comm[dim - 1, dim - 1] == pytest.approx(-(dim - 1))
    off = comm - np.diag(np.diag(comm))
    assert np.max(np.abs(off)) == 0.0


def test_dagger_involution():
    space = FockSpace((3, 2))
    m = RNG.normal(size=(6, 6)) + 1j * RNG.normal(size=(6, 6))
    x = Operator(space, m)
    assert np.array_equal(x.dagger().dagger().matrix, x.matrix)


def test_embedding_homomorphism():
    space = FockSpace((4, 3))
    x = Operator(FockSpace((4,)), RNG.normal(size=(4, 4)) + 1j * RNG.normal(size=(4, 4)))
    y = Operator(FockSpace((4,)), RNG.normal(size=(4, 4)) + 1j * RNG.normal(size=(4, 4)))
    lhs = embed(x @ y, 0, space).matrix
    rhs = (embed(x, 0, space) @ embed(y, 0, space)).matrix
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_index_lexicographic():
    space = FockSpace((2, 3))
    assert space.total_dim == 6
    assert space.index((0, 0)) == 0
    assert space.index((0, 2)) == 2
    assert space.index((1, 0)) == 3
    assert space.occupations(5) == (1, 2)


def test_space_rejects_degenerate_mode():
    with pytest.raises(DimensionError):
        FockSpace((3, 1))


def test_expectation_number_on_one_photon():
    space = FockSpace((3,))
    rho = DensityMatrix.from_pure(space, (1,))
    a = mode_annihilation(space, 0)
    assert expectation(rho, a.dagger() @ a) == pytest.approx(1.0)


def test_expectation_vacuum_normal_ordered():
    space = FockSpace((3, 3))
    rho = DensityMatrix.vacuum(space)
    a2 = mode_annihilation(space, 0)
    a3 = mode_annihilation(space, 1)
    for op in (a2.dagger() @ a2, a3.dagger() @ a3, a2.dagger() @ a3):
        assert expectation(rho, op) == 0.0


def test_expectation_pair_correlator_on_two_photons():
    space = FockSpace((4,))
    rho = DensityMatrix.from_pure(space, (2,))
    a = mode_annihilation(space, 0)
    val = expectation(rho, a.dagger() @ a.dagger() @ a @ a)
    assert val == pytest.approx(2.0)  # n(n-1)


def test_expectation_space_mismatch():
    rho = DensityMatrix.vacuum(FockSpace((2,)))
    with pytest.raises(SpaceMismatchError):
        expectation(rho, annihilation(3))


def test_density_matrix_validation():
    space = FockSpace((2,))
    DensityMatrix.vacuum(space).validate()
    with pytest.raises(StateValidationError):
        DensityMatrix(space, np.array([[1.0, 0.5], [0.0, 0.0]])).validate()
    with pytest.raises(StateValidationError):
        DensityMatrix(space, 2.0 * np.eye(2)).validate()
    with pytest.raises(StateValidationError):
        DensityMatrix(space, np.array([[1.5, 0.0], [0.0, -0.5]])).validate()
