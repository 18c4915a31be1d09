"""Render the experiment CSV files to figures.

The four layouts mirror the standard panels: the analytic-overlay sweep, the
two-track blockade comparison, the detuning map with its condition lines, and
the CW/pulsed time-trace pair.  matplotlib is imported lazily so the solver
library and CLI work without it; rendering is deterministic under the pinned
rc settings.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np


class SchemaError(ValueError):
    """A CSV input does not carry the columns a figure needs."""


#: pinned defaults so identical CSV inputs give identical image files
PINNED_RC = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.titlesize": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linewidth": 0.5,
    "lines.linewidth": 1.6,
    "legend.frameon": False,
    "figure.autolayout": True,
}

FIGURE_IDS = ("fig2", "fig3a", "fig3b", "fig4")


def load_table(path: str | Path) -> dict[str, np.ndarray]:
    """Read one runner CSV: skip # metadata, type columns as float or text.

    Empty cells parse as NaN.  A file without data rows is a schema error.
    """
    path = Path(path)
    header: list[str] | None = None
    raw_rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for record in csv.reader(line for line in fh if not line.startswith("#")):
            if not record:
                continue
            if header is None:
                header = record
            else:
                raw_rows.append(record)
    if header is None or not raw_rows:
        raise SchemaError(f"no data rows in {path}")
    columns: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        cells = [row[j] if j < len(row) else "" for row in raw_rows]
        values: list[float] | None = []
        for cell in cells:
            if cell == "":
                values.append(math.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                values = None
                break
        if values is None:
            columns[name] = np.asarray(cells, dtype=object)
        else:
            columns[name] = np.asarray(values, dtype=float)
    return columns


def require_columns(table: dict[str, np.ndarray], names: Sequence[str], path: str | Path):
    for name in names:
        if name not in table:
            raise SchemaError(f"missing column {name!r} in {path}")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _fig2_figure(plt, table):
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    x = table["alpha_over_kappa"]
    ax.semilogy(x, table["g2_0"], color="#1f5fa8", label="numerical")
    ax.semilogy(x, table["g2_analytic"], color="#d97706", linestyle="-.", label="analytic")
    ax.semilogy(x, np.ones_like(x), color="0.4", linestyle="--", label="classical")
    ax.set_xlabel(r"$\alpha/\kappa$")
    ax.set_ylabel(r"$g^{(2)}(0)$")
    ax.legend(loc="lower left")
    return fig


def _fig3a_figure(plt, table):
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    track = table["track"]
    for name, style, color in (
        ("three-mode", "-", "#1f5fa8"),
        ("single-mode", "--", "#b91c1c"),
    ):
        sel = track == name
        order = np.argsort(table["N2"][sel])
        ax.loglog(table["N2"][sel][order], table["g2_0"][sel][order],
                  linestyle=style, color=color, label=name)
    ax.set_xlabel(r"$N_2$")
    ax.set_ylabel(r"$g^{(2)}(0)$")
    ax.legend(loc="upper left")
    return fig


def _fig3b_figure(plt, table):
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    grid = table["track"] == "grid"
    d1 = np.unique(table["Delta1"][grid])
    d2 = np.unique(table["Delta2"][grid])
    g2 = np.full((d1.size, d2.size), np.nan)
    n3 = np.full((d1.size, d2.size), np.nan)
    i = np.searchsorted(d1, table["Delta1"][grid])
    j = np.searchsorted(d2, table["Delta2"][grid])
    g2[i, j] = table["g2_0"][grid]
    n3[i, j] = table["N3"][grid]
    with np.errstate(divide="ignore", invalid="ignore"):
        logg2 = np.log10(g2)
        logn3 = np.log10(n3)
    mesh = ax.pcolormesh(d1, d2, logg2.T, cmap="viridis", shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10} g^{(2)}(0)$")
    finite = np.isfinite(logn3)
    if finite.any():
        top = logn3[finite].max()
        ax.contour(d1, d2, logn3.T, levels=np.linspace(top - 3.0, top, 4),
                   colors="white", linestyles="dotted", linewidths=0.8)
    for name in ("line_single_photon", "line_parametric"):
        sel = table["track"] == name
        ax.plot(table["Delta1"][sel], table["Delta2"][sel],
                color="white", linestyle="--", linewidth=1.0)
    ax.set_xlim(d1[0], d1[-1])
    ax.set_ylim(d2[0], d2[-1])
    ax.set_xlabel(r"$\Delta_1$ (meV)")
    ax.set_ylabel(r"$\Delta_2$ (meV)")
    ax.grid(False)
    return fig


def _fig4_figure(plt, cw, pulsed):
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(7.6, 3.0))
    ax_a.plot(cw["tau_ps"], cw["g2"], color="#1f5fa8", label=r"$g^{(2)}(\tau)$")
    ax_a.plot(cw["tau_ps"], cw["N2"], color="#6b7280", linestyle="--", label=r"$N_2$")
    ax_a.set_xlabel(r"$\tau$ (ps)")
    ax_a.set_title("cw")
    ax_a.legend(loc="lower right")
    ax_b.plot(pulsed["t_ps"], pulsed["g2"], color="#1f5fa8", label=r"$g^{(2)}(t)$")
    ax_b.plot(pulsed["t_ps"], pulsed["N2"], color="#6b7280", linestyle="--", label=r"$N_2$")
    ax_b.set_xlabel(r"$t$ (ps)")
    ax_b.set_title("pulsed")
    ax_b.legend(loc="upper right")
    return fig


_SCHEMAS = {
    "fig2": (("alpha_over_kappa", "g2_0", "g2_analytic"),),
    "fig3a": (("track", "N2", "g2_0"),),
    "fig3b": (("track", "Delta1", "Delta2", "g2_0", "N3"),),
    "fig4": (("tau_ps", "g2", "N2"), ("t_ps", "N2", "g2")),
}


def build_figure(figure_id: str, csv_paths: Sequence[str | Path]):
    """Load the CSVs for one figure and return the assembled Figure.

    Styling is the caller's concern; render_figure pins it.
    """
    if figure_id not in FIGURE_IDS:
        raise SchemaError(f"unknown figure {figure_id!r}; expected one of {FIGURE_IDS}")
    schemas = _SCHEMAS[figure_id]
    if len(csv_paths) != len(schemas):
        raise SchemaError(
            f"{figure_id} needs {len(schemas)} csv file(s), got {len(csv_paths)}"
        )
    tables = []
    for path, needed in zip(csv_paths, schemas):
        table = load_table(path)
        require_columns(table, needed, path)
        tables.append(table)
    plt = _pyplot()
    if figure_id == "fig2":
        return _fig2_figure(plt, tables[0])
    if figure_id == "fig3a":
        return _fig3a_figure(plt, tables[0])
    if figure_id == "fig3b":
        return _fig3b_figure(plt, tables[0])
    return _fig4_figure(plt, tables[0], tables[1])


def render_figure(
    figure_id: str,
    csv_paths: Sequence[str | Path],
    out_path: str | Path,
    rc: dict | None = None,
) -> Path:
    """Render one figure to ``out_path``; the format follows its extension."""
    import matplotlib

    plt = _pyplot()
    settings = dict(PINNED_RC)
    if rc:
        settings.update(rc)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(settings):
        fig = build_figure(figure_id, csv_paths)
        try:
            fig.savefig(out_path)
        finally:
            plt.close(fig)
    return out_path
