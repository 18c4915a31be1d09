"""Command-line entry point.

``parablock <experiment> --config file.toml --out dir`` writes one CSV per
experiment (two for fig4) and, for the figure experiments, renders the
matching plot next to the data unless --no-render is given.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 convergence failure (validate only).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .lindblad import SolverError
from .runner import (
    CONVERGENCE_RTOL,
    ConfigError,
    build_config,
    load_config_file,
    run_fig2,
    run_fig3a,
    run_fig3b,
    run_fig4,
    run_steady,
    run_trace,
    validate_convergence,
    write_csv,
)

_FIGURES = ("fig2", "fig3a", "fig3b", "fig4")
_COMMANDS = {
    "fig2": "sweep alpha/kappa for the generic model with the analytic overlay",
    "fig3a": "sweep the probe amplitude: three-mode blockade vs single-mode baseline",
    "fig3b": "map g2(0) and N3 over the two pump detunings",
    "fig4": "cw delay correlation and single-pulse time trace",
    "steady": "one steady-state solve of the configured model",
    "trace": "time evolution from vacuum under the configured drive",
    "validate": "re-run the steady state at raised truncations and compare",
}


def _parse_truncation(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--truncation expects 'n2,n3', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"--truncation expects integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parablock",
        description="Master-equation experiments for parametric photon blockade.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in _COMMANDS.items():
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("--config", type=Path, default=None,
                         help="TOML config layered over the built-in defaults")
        cmd.add_argument("--out", type=Path, default=Path("."),
                         help="output directory (default: current directory)")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker processes for sweep grids (default 1)")
        cmd.add_argument("--truncation", type=str, default=None, metavar="N2,N3",
                         help="override truncation levels, e.g. 5,5")
        if name in _FIGURES:
            cmd.add_argument("--no-render", action="store_true",
                             help="skip the figure image, write CSV only")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = load_config_file(args.config) if args.config else None
        truncation = _parse_truncation(args.truncation) if args.truncation else None
        cfg = build_config(args.command, overrides, threads=args.threads,
                           truncation=truncation)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out: Path = args.out
    csv_paths: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "fig2":
            csv_paths.append(write_csv(out / "fig2.csv", run_fig2(cfg), cfg.echo_lines()))
        elif args.command == "fig3a":
            csv_paths.append(write_csv(out / "fig3a.csv", run_fig3a(cfg), cfg.echo_lines()))
        elif args.command == "fig3b":
            csv_paths.append(write_csv(out / "fig3b.csv", run_fig3b(cfg), cfg.echo_lines()))
        elif args.command == "fig4":
            cw, pulsed = run_fig4(cfg)
            csv_paths.append(write_csv(out / "cw.csv", cw, cfg.echo_lines()))
            csv_paths.append(write_csv(out / "pulsed.csv", pulsed, cfg.echo_lines()))
        elif args.command == "steady":
            write_csv(out / "steady.csv", run_steady(cfg), cfg.echo_lines())
        elif args.command == "trace":
            write_csv(out / "trace.csv", run_trace(cfg), cfg.echo_lines())
        elif args.command == "validate":
            report = validate_convergence(cfg)
            write_csv(out / "validate.csv", report.table, cfg.echo_lines())
            if not report.converged:
                print(
                    "convergence failure: "
                    + ", ".join(report.divergent)
                    + f" changed by more than {CONVERGENCE_RTOL:g} relative "
                    "between the base truncation and base + 2",
                    file=sys.stderr,
                )
                return 4
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3

    if args.command in _FIGURES and not args.no_render:
        try:
            from .report import render_figure

            render_figure(args.command, csv_paths, out / f"{args.command}.png")
        except ImportError:
            print("matplotlib unavailable: CSV written, figure skipped", file=sys.stderr)
        except Exception as exc:
            print(f"render error: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
