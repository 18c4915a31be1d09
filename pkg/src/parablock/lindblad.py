"""Liouvillian assembly, steady states, time evolution, photon correlations.

Vectorization is column-stacking throughout: vec(rho) stacks the columns of
rho (numpy order="F"), so vec(A rho B) = (B^T kron A) vec(rho).  All
superoperator formulas below are written against that convention.
"""

from __future__ import annotations

import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import MatrixRankWarning, expm_multiply, splu, spsolve

from .constants import TOL
from .fock import DensityMatrix, FockSpace, Operator, SpaceMismatchError, expectation


class SolverError(RuntimeError):
    """A linear solve or time integration failed."""


class DegenerateSteadyStateError(SolverError):
    """The Liouvillian kernel is not one-dimensional (or the solve stalled)."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.residual = residual


class UndefinedCorrelationError(ValueError):
    """g2 requested on a state with (numerically) zero occupation."""


@dataclass(frozen=True)
class DecayChannel:
    """A Lindblad jump operator with its decay rate.

    The rate is in energy/hbar units, i.e. inverse time: kappa itself in
    dimensionless runs, Gamma/hbar (1/ps) in physical runs.  Model modules
    own the meV -> 1/ps conversion; the engine never rescales rates.
    """

    operator: Operator
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"decay rate must be >= 0, got {self.rate}")


@dataclass(eq=False)
class Liouvillian:
    """Vectorized generator of the dissipative evolution (column stacking)."""

    space: FockSpace
    matrix: sp.csr_matrix

    @property
    def dim(self) -> int:
        return self.space.total_dim


@dataclass(eq=False)
class TimeTrace:
    """Sampled observables along an evolution."""

    times: np.ndarray
    observables: dict[str, np.ndarray]
    max_trace_drift: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("times must be a non-empty 1-d array")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, col in self.observables.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.times.shape:
                raise ValueError(f"column {name!r} length does not match times")
            self.observables[name] = col


def vectorize(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vec."""
    return np.asarray(matrix, dtype=complex).reshape(-1, order="F")


def unvectorize(v: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def _commutator_superoperator(h_matrix: np.ndarray, hbar: float) -> sp.csr_matrix:
    """-i/hbar (I kron H - H^T kron I), the column-stacked commutator part."""
    d = h_matrix.shape[0]
    eye = sp.identity(d, format="csr", dtype=complex)
    h = sp.csr_matrix(h_matrix)
    return (-1j / hbar) * (sp.kron(eye, h, format="csr") - sp.kron(h.T, eye, format="csr"))


def _dissipator_superoperator(a_matrix: np.ndarray) -> sp.csr_matrix:
    """conj(A) kron A - 1/2 I kron A^dag A - 1/2 (A^dag A)^T kron I."""
    d = a_matrix.shape[0]
    eye = sp.identity(d, format="csr", dtype=complex)
    a = sp.csr_matrix(a_matrix)
    ada = sp.csr_matrix(a_matrix.conj().T @ a_matrix)
    return (
        sp.kron(a.conj(), a, format="csr")
        - 0.5 * sp.kron(eye, ada, format="csr")
        - 0.5 * sp.kron(ada.T, eye, format="csr")
    )


def build_liouvillian(
    hamiltonian: Operator,
    channels: Sequence[DecayChannel],
    hbar: float = 1.0,
) -> Liouvillian:
    """Assemble the Lindblad superoperator for a Hamiltonian plus decay channels.

    The Hamiltonian is divided by ``hbar`` (meV with hbar=HBAR_MEV_PS gives
    time in ps; hbar=1 keeps kappa units).  Channel rates enter as given:
    they are already in inverse-time units per the DecayChannel contract.
    """
    if not hamiltonian.is_hermitian():
        dev = np.max(np.abs(hamiltonian.matrix - hamiltonian.matrix.conj().T))
        raise ValueError(f"Hamiltonian is not Hermitian (max deviation {dev:.3e})")
    space = hamiltonian.space
    lm = _commutator_superoperator(hamiltonian.matrix, hbar)
    for ch in channels:
        if ch.operator.space != space:
            raise SpaceMismatchError("decay channel operator on a different space")
        if ch.rate == 0.0:
            continue
        lm = lm + ch.rate * _dissipator_superoperator(ch.operator.matrix)
    return Liouvillian(space, sp.csr_matrix(lm))


def _trace_row_indices(dim: int) -> np.ndarray:
    """Vec indices of the diagonal elements (i, i) under column stacking."""
    return np.arange(dim) * (dim + 1)


def _finalize_state(space: FockSpace, rho: np.ndarray) -> DensityMatrix:
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if tr == 0.0:
        raise DegenerateSteadyStateError("steady-state candidate has zero trace", np.inf)
    return DensityMatrix(space, rho / tr)


def steady_residual(lv: Liouvillian, rho: DensityMatrix) -> float:
    """Max-norm of L applied to rho; the fixed-point defect actually achieved."""
    return float(np.max(np.abs(lv.matrix @ vectorize(rho.matrix))))


def _steady_by_direct_solve(lv: Liouvillian) -> np.ndarray:
    """Replace one diagonal row of L with the trace constraint and solve."""
    d = lv.dim
    n = d * d
    coo = lv.matrix.tocoo()
    keep = coo.row != 0  # row 0 corresponds to element (0,0): a diagonal row
    diag_mean = np.abs(lv.matrix.diagonal()).mean()
    weight = diag_mean if diag_mean > 0 else 1.0
    rows = np.concatenate([coo.row[keep], np.zeros(d, dtype=coo.row.dtype)])
    cols = np.concatenate([coo.col[keep], _trace_row_indices(d)])
    data = np.concatenate([coo.data[keep], np.full(d, weight, dtype=complex)])
    m = sp.csc_matrix((data, (rows, cols)), shape=(n, n))
    b = np.zeros(n, dtype=complex)
    b[0] = weight
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        x = spsolve(m, b)
    if not np.all(np.isfinite(x)):
        raise np.linalg.LinAlgError("direct steady-state solve returned non-finite values")
    return unvectorize(x, d)


def _kernel_by_inverse_iteration(lv: Liouvillian, max_iter: int = 60) -> tuple[np.ndarray, float]:
    """Shifted inverse iteration toward the kernel of L (deterministic start).

    Returns a unit-norm kernel candidate (as a matrix) and its residual.
    """
    d = lv.dim
    n = d * d
    shift = 1e-12 * max(1.0, float(np.abs(lv.matrix.diagonal()).max()))
    lu = splu(sp.csc_matrix(lv.matrix - shift * sp.identity(n, dtype=complex)))
    v = vectorize(np.eye(d, dtype=complex) / d)
    v = v / np.linalg.norm(v)
    best = v
    best_res = np.inf
    for _ in range(max_iter):
        v = lu.solve(v)
        v = v / np.linalg.norm(v)
        res = float(np.max(np.abs(lv.matrix @ v)))
        if res < best_res:
            best, best_res = v, res
        if res <= 0.1 * TOL.steady_residual:
            break
    return unvectorize(best, d), best_res


def steady_state(lv: Liouvillian) -> DensityMatrix:
    """Solve L vec(rho) = 0 with unit trace.

    Direct trace-replacement solve first; shifted inverse iteration polishes
    an ill-conditioned solve.  A singular trace-constrained system means the
    kernel is not one-dimensional (a trace-preserving generator with a unique
    fixed point always admits a unit-trace kernel vector), so that raises
    DegenerateSteadyStateError, as does a residual that never reaches bound.
    """
    try:
        rho_raw = _steady_by_direct_solve(lv)
    except (MatrixRankWarning, np.linalg.LinAlgError, RuntimeError):
        try:
            _, probe_res = _kernel_by_inverse_iteration(lv)
        except (np.linalg.LinAlgError, RuntimeError):
            probe_res = np.inf
        raise DegenerateSteadyStateError(
            "trace-constrained solve is singular: Liouvillian kernel dimension exceeds one",
            probe_res,
        ) from None
    rho = _finalize_state(lv.space, rho_raw)
    res = steady_residual(lv, rho)
    if res <= TOL.steady_residual:
        return rho
    try:
        polished, _ = _kernel_by_inverse_iteration(lv)
        rho2 = _finalize_state(lv.space, polished)
        res2 = steady_residual(lv, rho2)
        if res2 <= TOL.steady_residual:
            return rho2
        res = min(res, res2)
    except (np.linalg.LinAlgError, RuntimeError, DegenerateSteadyStateError):
        pass
    raise DegenerateSteadyStateError("steady-state residual did not reach tolerance", res)


HamiltonianTerm = Operator | tuple[Operator, Callable[[float], float]]


def _split_hamiltonian(
    hamiltonian: Operator | Sequence[HamiltonianTerm],
    space: FockSpace,
) -> tuple[Operator, list[tuple[Operator, Callable[[float], float]]]]:
    if isinstance(hamiltonian, Operator):
        return hamiltonian, []
    static = Operator(space, np.zeros((space.total_dim,) * 2, dtype=complex))
    tdep: list[tuple[Operator, Callable[[float], float]]] = []
    for term in hamiltonian:
        if isinstance(term, Operator):
            static = static + term
        else:
            op, envelope = term
            tdep.append((op, envelope))
    return static, tdep


Observable = Operator | Callable[[DensityMatrix], float]


def _measure(rho: DensityMatrix, obs: Observable) -> float:
    if isinstance(obs, Operator):
        return float(expectation(rho, obs).real)
    return float(obs(rho))


def evolve(
    rho0: DensityMatrix,
    hamiltonian: Operator | Sequence[HamiltonianTerm],
    channels: Sequence[DecayChannel],
    t_grid: np.ndarray,
    observables: dict[str, Observable] | None = None,
    hbar: float = 1.0,
    rtol: float = TOL.evolve_rtol,
    atol: float = TOL.evolve_atol,
    method: str = "rk45",
    max_step: float | None = None,
) -> tuple[TimeTrace, DensityMatrix]:
    """Integrate d rho/dt = L(t) rho and sample observables on t_grid.

    ``hamiltonian`` is either a single Operator or a list of terms, each a
    static Operator or an ``(Operator, envelope)`` pair with a real-valued
    envelope(t) multiplying that term.  Trace drift is measured against the
    initial trace (so correlation propagations keep their normalization);
    samples drifting beyond the tolerance are renormalized and the maximum
    drift is reported on the returned trace.

    ``max_step`` caps the internal step size.  It must be set small enough
    to resolve any short envelope: an adaptive integrator that starts on a
    stationary state would otherwise grow its step past a late pulse.

    ``method="expm"`` uses the exact sparse propagator between grid points;
    it is only valid when every Hamiltonian term is static.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ValueError("t_grid must contain at least two increasing times")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    space = rho0.space
    static, tdep = _split_hamiltonian(hamiltonian, space)
    for op, _ in tdep:
        if not op.is_hermitian():
            raise ValueError("time-dependent Hamiltonian terms must be Hermitian")
    lv = build_liouvillian(static, channels, hbar=hbar)
    drive_supers = [(_commutator_superoperator(op.matrix, hbar), env) for op, env in tdep]

    v0 = vectorize(rho0.matrix)
    if method == "expm":
        if drive_supers:
            raise ValueError("expm propagation requires a time-independent Hamiltonian")
        samples = np.empty((len(t_grid), len(v0)), dtype=complex)
        samples[0] = v0
        v = v0
        for k in range(1, len(t_grid)):
            dt = t_grid[k] - t_grid[k - 1]
            v = expm_multiply(lv.matrix * dt, v)
            samples[k] = v
    elif method == "rk45":
        l_static = lv.matrix

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            dy = l_static @ y
            for sup, env in drive_supers:
                dy = dy + env(t) * (sup @ y)
            return dy

        sol = solve_ivp(
            rhs,
            (t_grid[0], t_grid[-1]),
            v0,
            t_eval=t_grid,
            method="RK45",
            rtol=rtol,
            atol=atol,
            max_step=np.inf if max_step is None else max_step,
        )
        if not sol.success:
            raise SolverError(f"time integration failed: {sol.message}")
        samples = sol.y.T
    else:
        raise ValueError(f"unknown method {method!r}")

    obs = observables or {}
    columns: dict[str, list[float]] = {name: [] for name in obs}
    trace0 = np.trace(rho0.matrix).real
    max_drift = 0.0
    rho_t = rho0
    d = space.total_dim
    for k in range(len(t_grid)):
        m = unvectorize(samples[k], d)
        tr = np.trace(m).real
        drift = abs(tr - trace0)
        max_drift = max(max_drift, drift)
        if drift > TOL.trace_drift and tr != 0.0:
            m = m * (trace0 / tr)
        rho_t = DensityMatrix(space, m)
        for name, ob in obs.items():
            columns[name].append(_measure(rho_t, ob))
    trace = TimeTrace(
        times=t_grid,
        observables={name: np.asarray(col) for name, col in columns.items()},
        max_trace_drift=max_drift,
    )
    return trace, rho_t


def g2_equal_time(rho: DensityMatrix, mode_op: Operator) -> float:
    """Normalized equal-time second-order correlation of one mode.

    Returns <adag adag a a> / <adag a>^2; raises UndefinedCorrelationError
    when the occupation is numerically zero (callers that tabulate map this
    to an explicit missing value, never 0 or 1).
    """
    ad = mode_op.dagger()
    n = expectation(rho, ad @ mode_op).real
    if n <= TOL.g2_occupation_floor:
        raise UndefinedCorrelationError(f"occupation {n:.3e} too small for g2")
    num = expectation(rho, ad @ ad @ mode_op @ mode_op).real
    return num / n**2


def g2_observable(mode_op: Operator) -> Callable[[DensityMatrix], float]:
    """Equal-time g2 as a trace observable; undefined values become NaN."""

    def _g2(rho: DensityMatrix) -> float:
        try:
            return g2_equal_time(rho, mode_op)
        except UndefinedCorrelationError:
            return float("nan")

    return _g2


def g2_two_time(
    rho_ss: DensityMatrix,
    mode_op: Operator,
    lv: Liouvillian,
    tau_grid: np.ndarray,
    rtol: float = TOL.evolve_rtol,
    atol: float = TOL.evolve_atol,
) -> TimeTrace:
    """Two-time correlation g2(tau) from a steady state via quantum regression.

    Propagates B(tau) = e^{L tau}[a rho_ss a^dag] under the same generator
    and returns Tr[a^dag a B(tau)] / <a^dag a>^2 on tau_grid.  At tau=0 this
    reproduces :func:`g2_equal_time` on rho_ss.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or len(tau_grid) < 2:
        raise ValueError("tau_grid must contain at least two increasing delays")
    if np.any(np.diff(tau_grid) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    ad = mode_op.dagger()
    number = ad @ mode_op
    n_ss = expectation(rho_ss, number).real
    if n_ss <= TOL.g2_occupation_floor:
        raise UndefinedCorrelationError(f"steady occupation {n_ss:.3e} too small for g2")
    b0 = mode_op.matrix @ rho_ss.matrix @ ad.matrix
    sol = solve_ivp(
        lambda _t, y: lv.matrix @ y,
        (tau_grid[0], tau_grid[-1]),
        vectorize(b0),
        t_eval=tau_grid,
        method="RK45",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise SolverError(f"regression propagation failed: {sol.message}")
    d = rho_ss.space.total_dim
    g2 = np.empty(len(tau_grid))
    for k in range(len(tau_grid)):
        b_tau = unvectorize(sol.y[:, k], d)
        g2[k] = np.einsum("ij,ji->", number.matrix, b_tau).real / n_ss**2
    return TimeTrace(times=tau_grid, observables={"g2": g2})
