import json
from pathlib import Path

import pytest

from gsbm_plots import (PlotJob, PlotKind, SchemaError, build_figure, render)
from gsbm_plots.cli import main as cli_main

HIST_CSV = """bin_left,bin_right,count
-2.1,-1.0,40
-1.0,0.5,120
0.5,2.0,40
2.0,2.4,0
2.4,2.6,1
"""

DENSITY_CSV = """x,rho
-2.0,0.0
-1.0,0.27566444771091355
0.0,0.3183098861837907
1.0,0.27566444771091355
2.0,0.0
"""

SWEEP_CSV = """w,trial,lambda1,lambda2,gap,overlap,predicted_z
0.5,0,2.01,1.99,0.02,0.0,2.0
0.5,1,2.02,1.98,0.04,0.05,2.0
2.4,0,2.19,2.0,0.19,0.55,2.185
2.4,1,2.17,1.99,0.18,0.52,2.185
"""

OVERLAY = {"l_plus": 2.0114, "z": 2.2217, "lambda_c": 0.9738,
           "per_point": [{"w": 0.5, "predicted_z": 2.0, "mean_gap": 0.03,
                          "sd_gap": 0.01, "mean_overlap": 0.02},
                         {"w": 2.4, "predicted_z": 2.185, "mean_gap": 0.185,
                          "sd_gap": 0.01, "mean_overlap": 0.53}]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in (("hist.csv", HIST_CSV), ("density.csv", DENSITY_CSV),
                       ("sweep.csv", SWEEP_CSV)):
        p = tmp_path / name
        p.write_text(text)
        paths[name] = p
    overlay = tmp_path / "summary.json"
    overlay.write_text(json.dumps(OVERLAY))
    paths["summary.json"] = overlay
    return paths


def _line_positions(fig):
    ax = fig.axes[0]
    return sorted(float(line.get_xdata()[0]) for line in ax.lines
                  if len(set(line.get_xdata())) == 1)


def test_histogram_renders_with_overlay_lines(files, tmp_path):
    job = PlotJob(input_csv=files["hist.csv"], kind=PlotKind.HISTOGRAM,
                  output_image=tmp_path / "h.png",
                  overlay_json=files["summary.json"])
    fig = build_figure(job)
    assert _line_positions(fig) == [OVERLAY["l_plus"], OVERLAY["z"]]
    out = render(job)
    assert out.exists() and out.stat().st_size > 0


def test_histogram_without_outlier_draws_one_line(files, tmp_path):
    overlay = dict(OVERLAY, z=None)
    path = tmp_path / "sub.json"
    path.write_text(json.dumps(overlay))
    job = PlotJob(input_csv=files["hist.csv"], kind=PlotKind.HISTOGRAM,
                  output_image=tmp_path / "h.png", overlay_json=path)
    assert _line_positions(build_figure(job)) == [OVERLAY["l_plus"]]


def test_density_and_sweep_render(files, tmp_path):
    for name, kind in (("density.csv", PlotKind.DENSITY),
                       ("sweep.csv", PlotKind.SWEEP)):
        job = PlotJob(input_csv=files[name], kind=kind,
                      output_image=tmp_path / f"{kind.value}.png",
                      overlay_json=files["summary.json"])
        assert render(job).stat().st_size > 0


def test_schema_mismatch_names_offending_header(files, tmp_path):
    job = PlotJob(input_csv=files["sweep.csv"], kind=PlotKind.HISTOGRAM,
                  output_image=tmp_path / "x.png")
    with pytest.raises(SchemaError, match="w,trial,lambda1"):
        build_figure(job)


def test_empty_data_rows_rejected(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("bin_left,bin_right,count\n")
    job = PlotJob(input_csv=p, kind=PlotKind.HISTOGRAM,
                  output_image=tmp_path / "x.png")
    with pytest.raises(SchemaError, match="no data rows"):
        build_figure(job)


def test_deterministic_output(files, tmp_path):
    outs = []
    for name in ("a.png", "b.png"):
        job = PlotJob(input_csv=files["hist.csv"], kind=PlotKind.HISTOGRAM,
                      output_image=tmp_path / name,
                      overlay_json=files["summary.json"])
        outs.append(render(job).read_bytes())
    assert outs[0] == outs[1]


def test_cli_happy_path(files, tmp_path):
    out = tmp_path / "fig.png"
    code = cli_main(["--input", str(files["hist.csv"]), "--kind", "histogram",
                     "--overlay", str(files["summary.json"]),
                     "--out", str(out)])
    assert code == 0 and out.exists()


def test_cli_schema_error_exit(files, tmp_path, capsys):
    code = cli_main(["--input", str(files["hist.csv"]), "--kind", "sweep",
                     "--out", str(tmp_path / "fig.png")])
    assert code == 1
    assert "bin_left" in capsys.readouterr().err
