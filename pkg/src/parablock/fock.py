"""Truncated-Fock-space bosonic modes: spaces, operators, density matrices.

Basis ordering convention (fixed everywhere): lexicographic |n1 n2 ...> with
the first mode slowest-varying, i.e. the flat index of |n1 n2> on mode
dimensions (d1, d2) is n1*d2 + n2.  This matches a left-to-right Kronecker
product, so embed() is a plain chain of np.kron factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .constants import TOL


class DimensionError(ValueError):
    """A mode dimension or mode index is invalid for the requested operation."""


class SpaceMismatchError(ValueError):
    """Two objects that must live on the same FockSpace do not."""


class StateValidationError(ValueError):
    """A DensityMatrix violates hermiticity, unit trace, or positivity."""


@dataclass(frozen=True)
class FockSpace:
    """A tensor product of truncated bosonic modes.

    Parameters
    ----------
    mode_dims : tuple of int
        Per-mode truncation dimensions (dim = n_max + 1), each >= 2.
    """

    mode_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        object.__setattr__(self, "mode_dims", dims)
        if len(dims) == 0:
            raise DimensionError("FockSpace needs at least one mode")
        for d in dims:
            if d < 2:
                raise DimensionError(f"mode dimension must be >= 2, got {d}")

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.mode_dims)

    def index(self, occupations: tuple[int, ...]) -> int:
        """Flat basis index of |n1 n2 ...> (first mode slowest-varying)."""
        if len(occupations) != self.n_modes:
            raise DimensionError(
                f"expected {self.n_modes} occupation numbers, got {len(occupations)}"
            )
        idx = 0
        for n, d in zip(occupations, self.mode_dims):
            if not 0 <= n < d:
                raise DimensionError(f"occupation {n} outside [0, {d - 1}]")
            idx = idx * d + n
        return idx

    def occupations(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`index`."""
        if not 0 <= index < self.total_dim:
            raise DimensionError(f"basis index {index} outside [0, {self.total_dim - 1}]")
        out = []
        for d in reversed(self.mode_dims):
            out.append(index % d)
            index //= d
        return tuple(reversed(out))

    def basis_vector(self, occupations: tuple[int, ...]) -> np.ndarray:
        """Unit column vector for the Fock state |n1 n2 ...>."""
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.index(occupations)] = 1.0
        return v


@dataclass(eq=False)
class Operator:
    """A linear operator on a FockSpace, stored as a dense complex matrix."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if self.matrix.shape != (d, d):
            raise DimensionError(
                f"operator matrix shape {self.matrix.shape} does not match "
                f"space dimension {d}"
            )

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = TOL.hermiticity) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def _check_space(self, other: "Operator") -> None:
        if self.space != other.space:
            raise SpaceMismatchError("operators live on different FockSpaces")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)


@dataclass(eq=False)
class DensityMatrix:
    """System state on a FockSpace.

    Valid states are Hermitian, unit-trace, and positive semidefinite up to
    the shared tolerances; :meth:`validate` enforces this where required
    (solver outputs, tests).  Intermediate integration states are allowed to
    drift within the integrator's own tolerance.
    """

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if self.matrix.shape != (d, d):
            raise DimensionError(
                f"density matrix shape {self.matrix.shape} does not match "
                f"space dimension {d}"
            )

    @classmethod
    def from_pure(cls, space: FockSpace, occupations: tuple[int, ...]) -> "DensityMatrix":
        v = space.basis_vector(occupations)
        return cls(space, np.outer(v, v.conj()))

    @classmethod
    def vacuum(cls, space: FockSpace) -> "DensityMatrix":
        return cls.from_pure(space, (0,) * space.n_modes)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def validate(self) -> "DensityMatrix":
        """Raise StateValidationError unless Hermitian, unit-trace, positive."""
        herm = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if herm > TOL.hermiticity:
            raise StateValidationError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > TOL.trace:
            raise StateValidationError(f"trace {tr} deviates from 1 beyond {TOL.trace}")
        eigmin = float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min())
        if eigmin < TOL.positivity_floor:
            raise StateValidationError(f"minimum eigenvalue {eigmin:.3e} below floor")
        return self


def annihilation(dim: int) -> Operator:
    """Single-mode annihilation operator: M[n-1, n] = sqrt(n)."""
    if dim < 2:
        raise DimensionError(f"annihilation needs dim >= 2, got {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        m[n - 1, n] = math.sqrt(n)
    return Operator(FockSpace((dim,)), m)


def creation(dim: int) -> Operator:
    return annihilation(dim).dagger()


def identity(space: FockSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim, dtype=complex))


def embed(op: Operator, mode_index: int, space: FockSpace) -> Operator:
    """Tensor-embed a single-mode operator: I x ... x op x ... x I.

    The factor order follows the fixed slow-first basis ordering, so the
    result is a left-to-right Kronecker chain with op at mode_index.
    """
    if not 0 <= mode_index < space.n_modes:
        raise DimensionError(f"mode index {mode_index} outside [0, {space.n_modes - 1}]")
    if op.space.mode_dims != (space.mode_dims[mode_index],):
        raise DimensionError(
            f"operator dimension {op.space.mode_dims} does not match mode "
            f"{mode_index} dimension {space.mode_dims[mode_index]}"
        )
    factors = [
        op.matrix if k == mode_index else np.eye(d, dtype=complex)
        for k, d in enumerate(space.mode_dims)
    ]
    return Operator(space, reduce(np.kron, factors))


def mode_annihilation(space: FockSpace, mode_index: int) -> Operator:
    """Annihilation operator for one mode, embedded on the full space."""
    return embed(annihilation(space.mode_dims[mode_index]), mode_index, space)


def expectation(rho: DensityMatrix, op: Operator) -> complex:
    """Tr(op . rho)."""
    if rho.space != op.space:
        raise SpaceMismatchError("density matrix and operator on different spaces")
    return complex(np.einsum("ij,ji->", op.matrix, rho.matrix))
