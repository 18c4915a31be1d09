"""Experiment orchestration: config parsing, figure sweeps, CSV emission.

Configs are TOML files layered over per-experiment defaults; every run is
seedless and fully deterministic, so identical configs produce byte-identical
CSV files.  Sweep grid points are independent and may be farmed out to a
process pool; results are written in grid order regardless of completion
order, which keeps parallel output identical to serial output.
"""

from __future__ import annotations

import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .constants import HBAR_MEV_PS
from .dipolariton import (
    DipolaritonParams,
    build_dipolariton_liouvillian,
    build_effective_hamiltonian,
    decay_channels,
    diagonalize_linear,
    effective_constants,
    rate_per_ps,
    single_mode_blockade_reference,
)
from .fock import DensityMatrix, FockSpace, expectation, mode_annihilation
from .generic import ReducedParams, analytic_g2, build_reduced_hamiltonian
from .lindblad import (
    DecayChannel,
    UndefinedCorrelationError,
    build_liouvillian,
    evolve,
    g2_equal_time,
    g2_observable,
    g2_two_time,
    steady_residual,
    steady_state,
)

FLOAT_FORMAT = "%.8e"
CONVERGENCE_RTOL = 1e-4
# a grid point counts as truncation-converged when the top retained Fock
# level of every mode is essentially unpopulated
TAIL_OCCUPATION_BOUND = 1e-6

MODEL_KINDS = ("generic", "dipolariton", "single-mode-baseline")
DRIVE_KINDS = ("cw", "pulsed")
PULSE_SHAPES = ("gaussian", "square")


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError(f"axis {self.name!r}: count must be >= 1, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis {self.name!r}: scale must be linear or log")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError(f"axis {self.name!r}: log scale needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class DriveConfig:
    kind: str = "cw"
    shape: str = "gaussian"
    fwhm_ps: float = 50.0
    center_ps: float = 250.0
    peak: float = 0.0

    def __post_init__(self):
        if self.kind not in DRIVE_KINDS:
            raise ConfigError(f"drive kind must be one of {DRIVE_KINDS}, got {self.kind!r}")
        if self.shape not in PULSE_SHAPES:
            raise ConfigError(f"pulse shape must be one of {PULSE_SHAPES}, got {self.shape!r}")
        if self.fwhm_ps <= 0:
            raise ConfigError("pulse fwhm_ps must be positive")
        if self.kind == "pulsed" and self.peak <= 0:
            raise ConfigError("pulsed drive needs a positive peak amplitude")


@dataclass(frozen=True)
class TimeGrid:
    t_max_ps: float = 2000.0
    points: int = 801
    tau_points: int = 201  # delay grid for two-time correlations

    def __post_init__(self):
        if self.t_max_ps <= 0:
            raise ConfigError("time t_max_ps must be positive")
        if self.points < 2 or self.tau_points < 2:
            raise ConfigError("time grids need at least two points")

    def values(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max_ps, self.points)

    def tau_values(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max_ps, self.tau_points)


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    params: ReducedParams | DipolaritonParams
    truncation: tuple[int, int] = (5, 5)
    axes: tuple[SweepAxis, ...] = ()
    drive: DriveConfig = DriveConfig()
    time: TimeGrid = TimeGrid()
    threads: int = 1

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model kind must be one of {MODEL_KINDS}, got {self.model!r}")
        n2, n3 = self.truncation
        if n2 < 2 or n3 < 2:
            raise ConfigError(f"truncation levels must be >= 2, got {self.truncation}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def space(self) -> FockSpace:
        if self.model == "single-mode-baseline":
            return FockSpace((self.truncation[0] + 1,))
        return FockSpace((self.truncation[0] + 1, self.truncation[1] + 1))

    def echo_lines(self) -> list[str]:
        lines = [f"config: model.kind = {self.model}"]
        for f in fields(self.params):
            lines.append(f"config: model.{f.name} = {getattr(self.params, f.name)}")
        lines.append(f"config: truncation = {self.truncation[0]},{self.truncation[1]}")
        for ax in self.axes:
            lines.append(
                f"config: sweep.{ax.name} = {ax.scale}[{ax.start:g}, {ax.stop:g}] x{ax.count}"
            )
        d = self.drive
        if d.kind == "cw":
            lines.append("config: drive = cw")
        else:
            lines.append(
                f"config: drive = pulsed {d.shape} fwhm={d.fwhm_ps:g}ps "
                f"center={d.center_ps:g}ps peak={d.peak:g}"
            )
        t = self.time
        lines.append(f"config: time = [0, {t.t_max_ps:g}]ps x{t.points} (tau x{t.tau_points})")
        # threads deliberately not echoed: output must not depend on worker count
        return lines


def load_config_file(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


_MODEL_DEFAULTS: dict[str, Callable[[], ReducedParams | DipolaritonParams]] = {
    "generic": lambda: ReducedParams(Delta2=0.0, Delta3=0.0, alpha=1.0, F2=0.1),
    "dipolariton": DipolaritonParams,
    "single-mode-baseline": DipolaritonParams,
}


def _params_from_table(kind: str, table: dict) -> ReducedParams | DipolaritonParams:
    defaults = _MODEL_DEFAULTS[kind]()
    known = {f.name for f in fields(defaults)}
    overrides = {}
    for key, value in table.items():
        if key == "kind":
            continue
        if key not in known:
            raise ConfigError(f"unknown model parameter {key!r} for kind {kind!r}")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"model parameter {key!r} must be a number, got {value!r}")
        overrides[key] = complex(value) if key == "psi1" else float(value)
    try:
        return replace(defaults, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc


def _axes_from_table(sweep: dict) -> tuple[SweepAxis, ...]:
    entries = sweep.get("axes", [])
    if not isinstance(entries, list):
        raise ConfigError("sweep.axes must be an array of tables")
    axes = []
    for entry in entries:
        extra = set(entry) - {"name", "start", "stop", "count", "scale"}
        if extra:
            raise ConfigError(f"unknown sweep axis keys: {sorted(extra)}")
        try:
            axes.append(
                SweepAxis(
                    name=str(entry["name"]),
                    start=float(entry["start"]),
                    stop=float(entry["stop"]),
                    count=int(entry["count"]),
                    scale=str(entry.get("scale", "linear")),
                )
            )
        except KeyError as exc:
            raise ConfigError(f"sweep axis missing key {exc}") from exc
    return tuple(axes)


def config_from_dict(raw: dict, threads: int = 1) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a nested (TOML) dictionary."""
    known_tables = {"model", "truncation", "sweep", "drive", "time", "outputs"}
    extra = set(raw) - known_tables
    if extra:
        raise ConfigError(f"unknown config tables: {sorted(extra)}")
    model_table = raw.get("model", {})
    kind = model_table.get("kind", "dipolariton")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model kind must be one of {MODEL_KINDS}, got {kind!r}")
    params = _params_from_table(kind, model_table)

    trunc_table = raw.get("truncation", {})
    extra = set(trunc_table) - {"n2_max", "n3_max"}
    if extra:
        raise ConfigError(f"unknown truncation keys: {sorted(extra)}")
    truncation = (int(trunc_table.get("n2_max", 5)), int(trunc_table.get("n3_max", 5)))

    drive_table = raw.get("drive", {})
    extra = set(drive_table) - {"kind", "shape", "fwhm_ps", "center_ps", "peak"}
    if extra:
        raise ConfigError(f"unknown drive keys: {sorted(extra)}")
    drive = DriveConfig(
        kind=str(drive_table.get("kind", "cw")),
        shape=str(drive_table.get("shape", "gaussian")),
        fwhm_ps=float(drive_table.get("fwhm_ps", 50.0)),
        center_ps=float(drive_table.get("center_ps", 250.0)),
        peak=float(drive_table.get("peak", 0.0)),
    )

    time_table = raw.get("time", {})
    extra = set(time_table) - {"t_max_ps", "points", "tau_points"}
    if extra:
        raise ConfigError(f"unknown time keys: {sorted(extra)}")
    time = TimeGrid(
        t_max_ps=float(time_table.get("t_max_ps", 2000.0)),
        points=int(time_table.get("points", 801)),
        tau_points=int(time_table.get("tau_points", 201)),
    )

    return ExperimentConfig(
        model=kind,
        params=params,
        truncation=truncation,
        axes=_axes_from_table(raw.get("sweep", {})),
        drive=drive,
        time=time,
        threads=threads,
    )


def default_config(figure: str) -> dict:
    """Built-in defaults reproducing each figure at the published parameters."""
    if figure == "fig2":
        return {
            "model": {"kind": "generic", "Delta2": 0.0, "Delta3": 0.0, "F2": 0.1,
                      "kappa2": 1.0, "kappa3": 1.0},
            "truncation": {"n2_max": 5, "n3_max": 5},
            "sweep": {"axes": [
                {"name": "alpha_over_kappa", "start": 0.0, "stop": 5.0,
                 "count": 51, "scale": "linear"},
            ]},
        }
    if figure == "fig3a":
        return {
            "model": {"kind": "dipolariton"},
            "truncation": {"n2_max": 5, "n3_max": 5},
            # top endpoint sits on the 45%-occupation operating point
            "sweep": {"axes": [
                {"name": "F2", "start": 1e-4, "stop": 7.6e-3,
                 "count": 25, "scale": "log"},
            ]},
        }
    if figure == "fig3b":
        return {
            "model": {"kind": "dipolariton", "F2": 1e-3},
            "truncation": {"n2_max": 5, "n3_max": 5},
            # axes omitted: centred on the blue-shifted resonances at run time
        }
    if figure == "fig4":
        return {
            "model": {"kind": "dipolariton", "F2": 3.5e-3},
            "truncation": {"n2_max": 5, "n3_max": 5},
            "drive": {"kind": "pulsed", "shape": "gaussian", "fwhm_ps": 50.0,
                      "center_ps": 250.0, "peak": 1.07e-2},
            "time": {"t_max_ps": 2000.0, "points": 801, "tau_points": 201},
        }
    if figure in ("steady", "trace", "validate"):
        return {
            "model": {"kind": "dipolariton"},
            "truncation": {"n2_max": 5, "n3_max": 5},
        }
    raise ConfigError(f"no defaults for experiment {figure!r}")


def build_config(
    figure: str,
    overrides: dict | None = None,
    threads: int = 1,
    truncation: tuple[int, int] | None = None,
) -> ExperimentConfig:
    raw = default_config(figure)
    if overrides:
        raw = _merge(raw, overrides)
    cfg = config_from_dict(raw, threads=threads)
    if truncation is not None:
        cfg = replace(cfg, truncation=truncation)
    return cfg


# ---------------------------------------------------------------------------
# results and CSV emission


@dataclass
class SweepResult:
    columns: dict[str, list]
    meta: list[str]

    def __post_init__(self):
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"ragged result columns: {lengths}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])


def package_version() -> str:
    """git describe when running from a checkout, the wheel version otherwise."""
    try:
        proc = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
        if proc.returncode == 0 and proc.stdout.strip():
            return proc.stdout.strip()
    except OSError:
        pass
    return __version__


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return ""
    return FLOAT_FORMAT % x


def write_csv(path: str | Path, result: SweepResult, config_lines: Sequence[str]) -> Path:
    """Emit one experiment table: # metadata header, then comma-separated rows.

    Floats are printed with 9 significant digits; NaN cells are left empty;
    line endings are LF on every platform.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(result.columns)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(f"# parablock {package_version()}\n")
        for line in config_lines:
            fh.write(f"# {line}\n")
        for line in result.meta:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for k in range(result.n_rows):
            fh.write(",".join(_format_cell(result.columns[name][k]) for name in names) + "\n")
    return path


# ---------------------------------------------------------------------------
# shared steady-state machinery


def _tail_occupation(rho: DensityMatrix) -> float:
    """Total population sitting on the top retained level of any mode."""
    space = rho.space
    diag = np.real(np.diag(rho.matrix))
    tail = 0.0
    for idx in range(space.total_dim):
        occ = space.occupations(idx)
        if any(n == d - 1 for n, d in zip(occ, space.mode_dims)):
            tail += diag[idx]
    return float(tail)


def _solve_point(lv, space: FockSpace) -> tuple[float, float, float, float, int]:
    """(N2, N3, g2_0, residual, converged) for one steady-state solve."""
    rho = steady_state(lv)
    a2 = mode_annihilation(space, 0)
    n2 = float(expectation(rho, a2.dagger() @ a2).real)
    if space.n_modes > 1:
        a3 = mode_annihilation(space, 1)
        n3 = float(expectation(rho, a3.dagger() @ a3).real)
    else:
        n3 = 0.0
    try:
        g2 = g2_equal_time(rho, a2)
    except UndefinedCorrelationError:
        g2 = float("nan")
    res = steady_residual(lv, rho)
    converged = int(_tail_occupation(rho) < TAIL_OCCUPATION_BOUND)
    return n2, n3, g2, res, converged


# workers must be importable top-level functions so the process pool can
# pickle them


def _fig2_worker(task: tuple) -> tuple:
    alpha_over_kappa, rp_dict, dims = task
    rp = ReducedParams(**rp_dict)
    kappa = rp.kappa2
    rp = replace(rp, alpha=alpha_over_kappa * kappa)
    space = FockSpace(dims)
    h = build_reduced_hamiltonian(rp, space)
    channels = [
        DecayChannel(mode_annihilation(space, 0), rp.kappa2),
        DecayChannel(mode_annihilation(space, 1), rp.kappa3),
    ]
    lv = build_liouvillian(h, channels, hbar=1.0)
    n2, n3, g2, res, conv = _solve_point(lv, space)
    return (alpha_over_kappa, n2, n3, g2, analytic_g2(rp.alpha, kappa), res, conv)


def _fig3a_worker(task: tuple) -> tuple:
    track, f2, ec, psi1, dims = task
    if track == "three-mode":
        space = FockSpace(dims)
        lv = build_dipolariton_liouvillian(ec, psi1, f2, space)
    else:
        space = FockSpace((dims[0],))
        h = single_mode_blockade_reference(ec, f2, space)
        channels = [DecayChannel(mode_annihilation(space, 0), rate_per_ps(ec.Gamma2))]
        lv = build_liouvillian(h, channels, hbar=HBAR_MEV_PS)
    n2, n3, g2, res, conv = _solve_point(lv, space)
    return (track, f2, n2, n3, g2, res, conv)


def _fig3b_worker(task: tuple) -> tuple:
    d1, d2, ec, psi1, f2, dims, offset = task
    d3 = offset - d1 + 2.0 * d2
    ec_point = replace(ec, Delta1=d1, Delta2=d2, Delta3=d3)
    space = FockSpace(dims)
    lv = build_dipolariton_liouvillian(ec_point, psi1, f2, space)
    n2, n3, g2, res, conv = _solve_point(lv, space)
    return (d1, d2, d3, n2, n3, g2, res, conv)


def _map_tasks(worker: Callable, tasks: list, threads: int) -> list:
    if threads > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * threads))
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, tasks, chunksize=chunk))
    return [worker(t) for t in tasks]


def _single_axis(cfg: ExperimentConfig, name: str) -> SweepAxis:
    if len(cfg.axes) != 1 or cfg.axes[0].name != name:
        raise ConfigError(
            f"this experiment sweeps exactly one axis named {name!r}, "
            f"got {[ax.name for ax in cfg.axes]}"
        )
    return cfg.axes[0]


# ---------------------------------------------------------------------------
# figure experiments


def run_fig2(cfg: ExperimentConfig) -> SweepResult:
    """g2(0) against alpha/kappa for the reduced generic model, plus analytic."""
    if cfg.model != "generic":
        raise ConfigError("fig2 requires model.kind = generic")
    if not isinstance(cfg.params, ReducedParams):
        raise ConfigError("fig2 requires reduced generic parameters")
    axis = _single_axis(cfg, "alpha_over_kappa")
    rp_dict = asdict(cfg.params)
    dims = cfg.space.mode_dims
    tasks = [(float(a), rp_dict, dims) for a in axis.values()]
    rows = _map_tasks(_fig2_worker, tasks, cfg.threads)
    cols = {
        "alpha_over_kappa": [r[0] for r in rows],
        "N2": [r[1] for r in rows],
        "N3": [r[2] for r in rows],
        "g2_0": [r[3] for r in rows],
        "g2_analytic": [r[4] for r in rows],
        "residual": [r[5] for r in rows],
        "converged": [r[6] for r in rows],
    }
    return SweepResult(cols, meta=[f"F2/kappa = {cfg.params.F2 / cfg.params.kappa2:g}"])


def run_fig3a(cfg: ExperimentConfig) -> SweepResult:
    """g2(0) vs N2 for the three-mode model and the single-mode baseline."""
    if cfg.model != "dipolariton":
        raise ConfigError("fig3a requires model.kind = dipolariton")
    axis = _single_axis(cfg, "F2")
    params = cfg.params
    ec = effective_constants(diagonalize_linear(params), params)
    dims = cfg.space.mode_dims
    f2_values = [float(f) for f in axis.values()]
    tasks = [("three-mode", f2, ec, params.psi1, dims) for f2 in f2_values]
    tasks += [("single-mode", f2, ec, params.psi1, dims) for f2 in f2_values]
    rows = _map_tasks(_fig3a_worker, tasks, cfg.threads)
    cols = {
        "track": [r[0] for r in rows],
        "F2": [r[1] for r in rows],
        "N2": [r[2] for r in rows],
        "N3": [r[3] for r in rows],
        "g2_0": [r[4] for r in rows],
        "residual": [r[5] for r in rows],
        "converged": [r[6] for r in rows],
    }
    meta = [
        f"effective constants: c1={ec.c1:.6e} c2={ec.c2:.6e} c3={ec.c3:.6e} "
        f"c4={ec.c4:.6e} c5={ec.c5:.6e} c6={ec.c6:.6e}",
        f"decay: Gamma2={ec.Gamma2:.6e} Gamma3={ec.Gamma3:.6e} meV",
        "single-mode baseline: Kerr c3 at zero detuning, same Gamma2",
    ]
    return SweepResult(cols, meta=meta)


def run_fig3b(cfg: ExperimentConfig) -> SweepResult:
    """2D detuning map of g2(0) and N3 plus the two interference condition lines."""
    if cfg.model != "dipolariton":
        raise ConfigError("fig3b requires model.kind = dipolariton")
    params = cfg.params
    hd = diagonalize_linear(params)
    ec = effective_constants(hd, params)
    offset = float(hd.energies[2] + hd.energies[0] - 2.0 * hd.energies[1])
    n1 = abs(params.psi1) ** 2

    if cfg.axes:
        if len(cfg.axes) != 2 or [ax.name for ax in cfg.axes] != ["Delta1", "Delta2"]:
            raise ConfigError("fig3b sweeps exactly two axes named Delta1, Delta2")
        ax1, ax2 = cfg.axes
    else:
        # default grid brackets both condition lines around their intersection
        ax1 = SweepAxis("Delta1", ec.Delta1 - 3.0, ec.Delta1 + 3.0, 61)
        ax2 = SweepAxis("Delta2", ec.Delta2 - 3.0, ec.Delta2 + 3.0, 61)

    d1_values = ax1.values()
    d2_values = ax2.values()
    dims = cfg.space.mode_dims
    tasks = [
        (float(d1), float(d2), ec, params.psi1, params.F2, dims, offset)
        for d1 in d1_values
        for d2 in d2_values
    ]
    rows = _map_tasks(_fig3b_worker, tasks, cfg.threads)

    track = ["grid"] * len(rows)
    col_d1 = [r[0] for r in rows]
    col_d2 = [r[1] for r in rows]
    col_d3 = [r[2] for r in rows]
    col_n2 = [r[3] for r in rows]
    col_n3 = [r[4] for r in rows]
    col_g2 = [r[5] for r in rows]
    col_res = [r[6] for r in rows]
    col_conv = [r[7] for r in rows]

    # condition lines as geometry-only tracks: Delta2 + c1 n1 = 0 across the
    # Delta1 axis, and Delta3 + c2 n1 = 0 parametrized by the Delta2 axis
    nan = float("nan")
    for d1 in d1_values:
        d2 = -ec.c1 * n1
        track.append("line_single_photon")
        col_d1.append(float(d1))
        col_d2.append(d2)
        col_d3.append(offset - float(d1) + 2.0 * d2)
        for col in (col_n2, col_n3, col_g2, col_res):
            col.append(nan)
        col_conv.append("")
    for d2 in d2_values:
        d1 = offset + ec.c2 * n1 + 2.0 * float(d2)
        track.append("line_parametric")
        col_d1.append(d1)
        col_d2.append(float(d2))
        col_d3.append(-ec.c2 * n1)
        for col in (col_n2, col_n3, col_g2, col_res):
            col.append(nan)
        col_conv.append("")

    cols = {
        "track": track,
        "Delta1": col_d1,
        "Delta2": col_d2,
        "Delta3": col_d3,
        "N2": col_n2,
        "N3": col_n3,
        "g2_0": col_g2,
        "residual": col_res,
        "converged": col_conv,
    }
    meta = [
        f"grid: {ax1.count} x {ax2.count} points, F2 = {params.F2:g}",
        f"condition lines intersect at Delta1 = {ec.Delta1:.6f}, Delta2 = {ec.Delta2:.6f}",
        f"mode-energy offset E3 + E1 - 2 E2 = {offset:.6f} meV",
    ]
    return SweepResult(cols, meta=meta)


def _pulse_envelope(drive: DriveConfig) -> Callable[[float], float]:
    if drive.shape == "gaussian":
        sigma = drive.fwhm_ps / (2.0 * math.sqrt(2.0 * math.log(2.0)))

        def env(t: float) -> float:
            return drive.peak * math.exp(-0.5 * ((t - drive.center_ps) / sigma) ** 2)

        return env

    def env(t: float) -> float:
        return drive.peak if abs(t - drive.center_ps) <= 0.5 * drive.fwhm_ps else 0.0

    return env


def run_fig4(cfg: ExperimentConfig) -> tuple[SweepResult, SweepResult]:
    """CW two-time correlation and the pulsed time trace at the operating point."""
    if cfg.model != "dipolariton":
        raise ConfigError("fig4 requires model.kind = dipolariton")
    if cfg.drive.kind != "pulsed":
        raise ConfigError("fig4 requires a pulsed drive block for panel (b)")
    params = cfg.params
    ec = effective_constants(diagonalize_linear(params), params)
    space = cfg.space
    a2 = mode_annihilation(space, 0)
    n2_op = a2.dagger() @ a2

    # panel (a): steady state under the cw probe, then the delay dependence
    lv = build_dipolariton_liouvillian(ec, params.psi1, params.F2, space)
    rho_ss = steady_state(lv)
    n2_ss = float(expectation(rho_ss, n2_op).real)
    g2_zero = g2_equal_time(rho_ss, a2)
    residual = steady_residual(lv, rho_ss)
    tau = cfg.time.tau_values()
    trace_cw = g2_two_time(rho_ss, a2, lv, tau)
    cw = SweepResult(
        {
            "tau_ps": list(tau),
            "g2": list(trace_cw.observables["g2"]),
            "N2": [n2_ss] * len(tau),
        },
        meta=[
            f"cw probe F2 = {params.F2:g} meV",
            f"steady state: N2 = {n2_ss:.6e}, g2(0) = {g2_zero:.6e}, residual = {residual:.3e}",
        ],
    )

    # panel (b): one pulse from vacuum; the repetition period is metadata only
    env = _pulse_envelope(cfg.drive)
    h_zero = build_effective_hamiltonian(ec, params.psi1, 0.0, space)
    drive_op = a2.dagger() + a2
    t_grid = cfg.time.values()
    max_step = cfg.drive.fwhm_ps / (4.0 if cfg.drive.shape == "gaussian" else 8.0)
    trace_p, _ = evolve(
        DensityMatrix.vacuum(space),
        [h_zero, (drive_op, env)],
        decay_channels(ec, space),
        t_grid,
        observables={"N2": n2_op, "g2": g2_observable(a2)},
        hbar=HBAR_MEV_PS,
        max_step=max_step,
    )
    n2_t = trace_p.observables["N2"]
    g2_t = trace_p.observables["g2"]
    envelope = np.array([env(t) for t in t_grid])
    in_pulse = envelope >= 0.5 * cfg.drive.peak
    peak_idx = int(np.argmax(n2_t))
    pulsed = SweepResult(
        {
            "t_ps": list(t_grid),
            "F2_t": list(envelope),
            "N2": list(n2_t),
            "g2": list(g2_t),
        },
        meta=[
            f"pulse: {cfg.drive.shape}, fwhm = {cfg.drive.fwhm_ps:g} ps, "
            f"center = {cfg.drive.center_ps:g} ps, peak = {cfg.drive.peak:g} meV",
            "repetition period: 1000 ns (metadata only; a single pulse is simulated)",
            f"peak N2 = {n2_t[peak_idx]:.6e} at t = {t_grid[peak_idx]:.1f} ps",
            f"max equal-time g2 inside the fwhm window = {np.nanmax(g2_t[in_pulse]):.6e}",
            f"max trace drift = {trace_p.max_trace_drift:.3e}",
        ],
    )
    return cw, pulsed


# ---------------------------------------------------------------------------
# steady / trace / validate


def _steady_liouvillian(cfg: ExperimentConfig):
    space = cfg.space
    if cfg.model == "generic":
        rp = cfg.params
        h = build_reduced_hamiltonian(rp, space)
        channels = [
            DecayChannel(mode_annihilation(space, 0), rp.kappa2),
            DecayChannel(mode_annihilation(space, 1), rp.kappa3),
        ]
        return build_liouvillian(h, channels, hbar=1.0), space
    params = cfg.params
    ec = effective_constants(diagonalize_linear(params), params)
    if cfg.model == "single-mode-baseline":
        h = single_mode_blockade_reference(ec, params.F2, space)
        channels = [DecayChannel(mode_annihilation(space, 0), rate_per_ps(ec.Gamma2))]
        return build_liouvillian(h, channels, hbar=HBAR_MEV_PS), space
    return build_dipolariton_liouvillian(ec, params.psi1, params.F2, space), space


def run_steady(cfg: ExperimentConfig) -> SweepResult:
    """Single steady-state solve of the configured model."""
    if cfg.drive.kind != "cw":
        raise ConfigError("steady requires a cw drive")
    lv, space = _steady_liouvillian(cfg)
    n2, n3, g2, res, conv = _solve_point(lv, space)
    cols = {
        "N2": [n2],
        "N3": [n3],
        "g2_0": [g2],
        "residual": [res],
        "converged": [conv],
    }
    return SweepResult(cols, meta=[])


def run_trace(cfg: ExperimentConfig) -> SweepResult:
    """Time evolution from vacuum under the configured drive."""
    space = cfg.space
    if space.n_modes != 2:
        raise ConfigError("trace supports the two-mode models")
    a2 = mode_annihilation(space, 0)
    a3 = mode_annihilation(space, 1)
    observables = {"N2": a2.dagger() @ a2, "N3": a3.dagger() @ a3, "g2": g2_observable(a2)}

    if cfg.model == "generic":
        rp = cfg.params
        hbar = 1.0
        h_zero = build_reduced_hamiltonian(replace(rp, F2=0.0), space)
        channels = [
            DecayChannel(mode_annihilation(space, 0), rp.kappa2),
            DecayChannel(mode_annihilation(space, 1), rp.kappa3),
        ]
        cw_amplitude = rp.F2
    else:
        params = cfg.params
        hbar = HBAR_MEV_PS
        ec = effective_constants(diagonalize_linear(params), params)
        h_zero = build_effective_hamiltonian(ec, params.psi1, 0.0, space)
        channels = decay_channels(ec, space)
        cw_amplitude = params.F2

    if cfg.drive.kind == "pulsed":
        env = _pulse_envelope(cfg.drive)
        max_step = cfg.drive.fwhm_ps / (4.0 if cfg.drive.shape == "gaussian" else 8.0)
    else:
        env = lambda t: cw_amplitude
        max_step = None
    drive_op = a2.dagger() + a2
    t_grid = cfg.time.values()
    trace, _ = evolve(
        DensityMatrix.vacuum(space),
        [h_zero, (drive_op, env)],
        channels,
        t_grid,
        observables=observables,
        hbar=hbar,
        max_step=max_step,
    )
    cols = {
        "t": list(t_grid),
        "F2_t": [env(t) for t in t_grid],
        "N2": list(trace.observables["N2"]),
        "N3": list(trace.observables["N3"]),
        "g2": list(trace.observables["g2"]),
    }
    unit = "1/kappa2" if cfg.model == "generic" else "ps"
    meta = [
        f"time unit: {unit}",
        f"max trace drift = {trace.max_trace_drift:.3e}",
    ]
    return SweepResult(cols, meta=meta)


@dataclass
class ConvergenceReport:
    table: SweepResult
    converged: bool
    divergent: tuple[str, ...]


def validate_convergence(cfg: ExperimentConfig) -> ConvergenceReport:
    """Re-run the configured steady state at raised truncations.

    The config passes when g2(0) and N2 move by less than 1e-4 relative
    between the base truncation and base + 2; the intermediate level is
    reported as well.
    """
    if cfg.drive.kind != "cw":
        raise ConfigError("validate requires a cw drive")
    n2_base, n3_base = cfg.truncation
    levels = [(n2_base + k, n3_base + k) for k in range(3)]
    rows = []
    for trunc in levels:
        lv, space = _steady_liouvillian(replace(cfg, truncation=trunc))
        rows.append(_solve_point(lv, space))

    def rel_change(a: float, b: float) -> float:
        if math.isnan(a) or math.isnan(b):
            return float("inf")
        return abs(b - a) / max(abs(a), 1e-300)

    changes = {
        "N2": rel_change(rows[0][0], rows[2][0]),
        "g2_0": rel_change(rows[0][2], rows[2][2]),
    }
    divergent = tuple(name for name, ch in changes.items() if not ch < CONVERGENCE_RTOL)
    cols = {
        "n2_max": [t[0] for t in levels],
        "n3_max": [t[1] for t in levels],
        "N2": [r[0] for r in rows],
        "N3": [r[1] for r in rows],
        "g2_0": [r[2] for r in rows],
        "residual": [r[3] for r in rows],
        "converged": [r[4] for r in rows],
    }
    meta = [
        f"convergence: N2 relative change (n -> n+2) = {changes['N2']:.3e}",
        f"convergence: g2_0 relative change (n -> n+2) = {changes['g2_0']:.3e}",
        f"convergence threshold: {CONVERGENCE_RTOL:g} relative",
        "convergence verdict: "
        + ("converged" if not divergent else "non-converged (" + ", ".join(divergent) + ")"),
    ]
    return ConvergenceReport(
        table=SweepResult(cols, meta=meta),
        converged=not divergent,
        divergent=divergent,
    )
