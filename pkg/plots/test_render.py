import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import render
from render import FIGURES, SchemaError, load_csv

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.mark.parametrize("figure", FIGURES)
def test_render_every_figure(figure, tmp_path):
    path = render.render(figure, FIXTURES, tmp_path)
    assert os.path.exists(path)
    assert path.endswith(f"{figure}.svg")
    assert os.path.getsize(path) > 1000


def test_fig4a_has_guide_lines(tmp_path):
    fig = render.RENDERERS["fig4a"](FIXTURES)
    guides = [ln for ln in fig.axes[0].lines if ln.get_gid() == "guide"]
    assert len(guides) == 5


def test_unknown_figure_rejected(tmp_path):
    with pytest.raises(SchemaError):
        render.render("fig7", FIXTURES, tmp_path)


def test_empty_csv_rejected(tmp_path):
    src = os.path.join(FIXTURES, "fig5.csv")
    with open(tmp_path / "fig5.csv", "w") as fh:
        fh.write(open(src).readline())  # header only
    with pytest.raises(SchemaError, match="no data rows"):
        render.render("fig5", tmp_path, tmp_path)


def test_missing_column_named(tmp_path):
    lines = open(os.path.join(FIXTURES, "fig5.csv")).read().splitlines()
    header = lines[0].split(",")
    drop = header.index("r_eps")
    with open(tmp_path / "fig5.csv", "w") as fh:
        for line in lines:
            cells = line.split(",")
            fh.write(",".join(c for i, c in enumerate(cells) if i != drop)
                     + "\n")
    with pytest.raises(SchemaError, match="r_eps"):
        render.render("fig5", tmp_path, tmp_path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(SchemaError, match="missing input file"):
        render.render("fig9", tmp_path, tmp_path)


def test_load_csv_roundtrip():
    rows = load_csv(os.path.join(FIXTURES, "fig9.csv"),
                    ("code", "setup", "r_eps"))
    assert {r["setup"] for r in rows} == {"single", "reuse1", "reuse3",
                                          "reuse4"}


def test_cli_renders(tmp_path):
    status = render.main(["--figure", "fig4a", "--in", FIXTURES,
                          "--out", str(tmp_path)])
    assert status == 0
    assert (tmp_path / "fig4a.svg").exists()


def test_cli_reports_schema_errors(tmp_path):
    status = render.main(["--figure", "fig4a", "--in", str(tmp_path),
                          "--out", str(tmp_path)])
    assert status == 1
