"""Rendering: each golden CSV set produces a figure, schema errors exit early."""

import hashlib
import importlib.util
import subprocess
import sys
from pathlib import Path

import pytest

from parablock.report import SchemaError, build_figure

PLOTS_DIR = Path(__file__).resolve().parents[1]
GOLDEN = PLOTS_DIR / "golden"

_spec = importlib.util.spec_from_file_location("plots_render", PLOTS_DIR / "render.py")
render = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(render)

GOLDEN_INPUTS = {
    "fig2": [GOLDEN / "fig2.csv"],
    "fig3a": [GOLDEN / "fig3a.csv"],
    "fig3b": [GOLDEN / "fig3b.csv"],
    "fig4": [GOLDEN / "cw.csv", GOLDEN / "pulsed.csv"],
}


def _render(figure, inputs, out):
    argv = ["--figure", figure, "--in", *[str(p) for p in inputs], "--out", str(out)]
    return render.main(argv)


@pytest.mark.parametrize("figure", sorted(GOLDEN_INPUTS))
def test_render_produces_file(figure, tmp_path):
    out = tmp_path / f"{figure}.png"
    assert _render(figure, GOLDEN_INPUTS[figure], out) == 0
    assert out.exists() and out.stat().st_size > 0


def test_render_does_not_mutate_inputs(tmp_path):
    before = [hashlib.sha256(p.read_bytes()).hexdigest() for p in GOLDEN_INPUTS["fig2"]]
    _render("fig2", GOLDEN_INPUTS["fig2"], tmp_path / "f.png")
    after = [hashlib.sha256(p.read_bytes()).hexdigest() for p in GOLDEN_INPUTS["fig2"]]
    assert before == after


def test_render_is_deterministic(tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    assert _render("fig3a", GOLDEN_INPUTS["fig3a"], a) == 0
    assert _render("fig3a", GOLDEN_INPUTS["fig3a"], b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fig2_has_exactly_three_curves():
    fig = build_figure("fig2", GOLDEN_INPUTS["fig2"])
    try:
        (ax,) = fig.axes
        assert len(ax.get_lines()) == 3  # numerical, analytic, classical unity
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)


def test_missing_column_is_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    lines = (GOLDEN / "fig2.csv").read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    stripped = "\n".join(
        ",".join(ln.split(",")[1:]) if not ln.startswith("#") else ln for ln in lines
    )
    bad.write_text(stripped + "\n")
    assert "alpha_over_kappa" in header
    with pytest.raises(SchemaError, match="alpha_over_kappa"):
        build_figure("fig2", [bad])
    assert _render("fig2", [bad], tmp_path / "f.png") == 2


def test_empty_sweep_is_schema_error(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# parablock test\nalpha_over_kappa,g2_0,g2_analytic\n")
    assert _render("fig2", [empty], tmp_path / "f.png") == 2


def test_missing_file_exits_nonzero(tmp_path):
    assert _render("fig2", [tmp_path / "absent.csv"], tmp_path / "f.png") == 2


def test_wrong_input_count_is_schema_error(tmp_path):
    assert _render("fig4", [GOLDEN / "cw.csv"], tmp_path / "f.png") == 2


def test_script_entry_point(tmp_path):
    out = tmp_path / "fig2.png"
    proc = subprocess.run(
        [
            sys.executable, str(PLOTS_DIR / "render.py"),
            "--figure", "fig2",
            "--in", str(GOLDEN / "fig2.csv"),
            "--out", str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
