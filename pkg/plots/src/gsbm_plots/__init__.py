"""Render gsbmlab report files as figures.

Consumes only the CSV/JSON files the main toolkit emits; no theory value is
recomputed here.  Overlay lines (support edge, predicted outlier) come
exclusively from the JSON summary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__version__ = "0.1.0"

EXPECTED_HEADERS = {
    "histogram": ["bin_left", "bin_right", "count"],
    "density": ["x", "rho"],
    "sweep": ["w", "trial", "lambda1", "lambda2", "gap", "overlap", "predicted_z"],
}

#: fixed style so identical inputs render pixel-identical images
STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class SchemaError(ValueError):
    """The input file does not match the expected schema for its kind."""


class PlotKind(str, Enum):
    HISTOGRAM = "histogram"
    DENSITY = "density"
    SWEEP = "sweep"


@dataclass(frozen=True)
class PlotJob:
    input_csv: Path
    kind: PlotKind
    output_image: Path
    overlay_json: Path | None = None


def read_table(path: Path, kind: PlotKind) -> dict[str, np.ndarray]:
    """Read a report CSV, enforcing the exact header for the plot kind."""
    expected = EXPECTED_HEADERS[kind.value]
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(expected)}") from None
        if header != expected:
            raise SchemaError(
                f"{path}: header {','.join(header)!r} does not match the "
                f"{kind.value} schema {','.join(expected)!r}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    columns = np.array(rows, dtype=np.float64).T
    return {name: columns[i] for i, name in enumerate(expected)}


def read_overlay(path: Path | None) -> dict | None:
    if path is None:
        return None
    with open(path) as f:
        return json.load(f)


def _overlay_lines(ax, overlay: dict | None):
    if overlay is None:
        return
    l_plus = overlay.get("l_plus")
    z = overlay.get("z")
    if l_plus is not None:
        ax.axvline(l_plus, color="tab:gray", linestyle="--", linewidth=1.2,
                   label="support edge")
    if z is not None:
        ax.axvline(z, color="tab:red", linestyle="-", linewidth=1.2,
                   label="predicted outlier")


def _histogram_figure(table, overlay):
    fig, ax = plt.subplots()
    left = table["bin_left"]
    width = table["bin_right"] - table["bin_left"]
    ax.bar(left, table["count"], width=width, align="edge",
           color="tab:blue", edgecolor="none", label="eigenvalues")
    _overlay_lines(ax, overlay)
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("count")
    ax.legend(loc="upper right")
    return fig


def _density_figure(table, overlay):
    fig, ax = plt.subplots()
    ax.plot(table["x"], table["rho"], color="tab:blue", label="density")
    _overlay_lines(ax, overlay)
    ax.set_xlabel("x")
    ax.set_ylabel("rho(x)")
    ax.legend(loc="upper right")
    return fig


def _sweep_figure(table, overlay):
    fig, ax = plt.subplots()
    ws = np.unique(table["w"])
    means = np.array([table["gap"][table["w"] == w].mean() for w in ws])
    sds = np.array([table["gap"][table["w"] == w].std(ddof=1)
                    if np.sum(table["w"] == w) > 1 else 0.0 for w in ws])
    ax.errorbar(ws, means, yerr=sds, fmt="o-", color="tab:blue",
                capsize=3, label="mean gap")
    if overlay is not None and "per_point" in overlay:
        l_plus = overlay.get("l_plus", 0.0)
        pw = [p["w"] for p in overlay["per_point"]]
        pg = [max(p["predicted_z"] - l_plus, 0.0) for p in overlay["per_point"]]
        ax.plot(pw, pg, color="tab:red", linestyle="--", label="predicted gap")
    ax.set_xlabel("signal strength w")
    ax.set_ylabel("top-eigenvalue gap")
    ax.legend(loc="upper left")
    return fig


def build_figure(job: PlotJob):
    """Build the figure without writing it (used by tests to inspect lines)."""
    table = read_table(Path(job.input_csv), job.kind)
    overlay = read_overlay(job.overlay_json)
    with plt.rc_context(STYLE):
        if job.kind is PlotKind.HISTOGRAM:
            return _histogram_figure(table, overlay)
        if job.kind is PlotKind.DENSITY:
            return _density_figure(table, overlay)
        return _sweep_figure(table, overlay)


def render(job: PlotJob) -> Path:
    """Render the job to its output image; returns the path written."""
    fig = build_figure(job)
    out = Path(job.output_image)
    try:
        fig.savefig(out, metadata={"Software": f"gsbm-plots {__version__}"})
    finally:
        plt.close(fig)
    return out
