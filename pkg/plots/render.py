#!/usr/bin/env python3
"""Render experiment CSV files to figure images with the checked-in style.

Thin wrapper over parablock.report so these figures and the CLI's --render
output cannot drift apart; the style file pins every knob that affects
pixels, making identical inputs give identical image files.
"""

import argparse
import sys
from pathlib import Path

from matplotlib import rc_params_from_file

from parablock.report import FIGURE_IDS, SchemaError, render_figure

STYLE_PATH = Path(__file__).resolve().parent / "style.mplstyle"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="render one figure from runner CSV output"
    )
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument(
        "--in", dest="inputs", nargs="+", required=True, metavar="CSV",
        help="input CSV file(s); fig4 takes cw.csv then pulsed.csv",
    )
    parser.add_argument("--out", required=True, metavar="IMG",
                        help="output image path; format follows the extension")
    args = parser.parse_args(argv)
    style = rc_params_from_file(STYLE_PATH, use_default_template=False)
    try:
        render_figure(args.figure, args.inputs, args.out, rc=style)
    except (SchemaError, OSError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
