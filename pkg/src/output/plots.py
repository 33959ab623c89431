"""SVG line plots drawn from experiment CSV files.

A plot only reads the CSV it illustrates, so any external tool can redraw it.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.io.csv_io import read_table  # noqa: E402


@dataclass(frozen=True)
class PlotSpec:
    """How to draw one CSV.

    Attributes:
        x: Column on the horizontal axis
        y: Columns drawn as lines (one line per column, or per series value)
        series: Column whose distinct values split the rows into lines
        yerr: Column with error-bar half widths
        logy: Logarithmic vertical axis
    """

    x: str
    y: tuple[str, ...]
    title: str
    xlabel: str
    ylabel: str
    series: Optional[str] = None
    yerr: Optional[str] = None
    logy: bool = True
    filter: Optional[tuple[str, str]] = None


def _as_float(value: str) -> float:
    return float(value) if value not in ("", None) else float("nan")


def plot_csv(csv_path: Path, svg_path: Path, spec: PlotSpec) -> Path:
    """Render csv_path as an SVG line plot according to spec."""
    rows = read_table(csv_path)
    if spec.filter is not None:
        column, value = spec.filter
        rows = [r for r in rows if r[column] == value]

    plt.rcParams["svg.hashsalt"] = "aircomp"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if spec.series:
        groups: dict[str, list[dict]] = {}
        for row in rows:
            groups.setdefault(row[spec.series], []).append(row)
        lines = [(name, group, spec.y[0]) for name, group in groups.items()]
    else:
        lines = [(column, rows, column) for column in spec.y]

    for label, group, column in lines:
        group = sorted(group, key=lambda r: _as_float(r[spec.x]))
        xs = [_as_float(r[spec.x]) for r in group]
        ys = [_as_float(r[column]) for r in group]
        if spec.yerr:
            errs = [_as_float(r[spec.yerr]) for r in group]
            ax.errorbar(xs, ys, yerr=errs, marker="o", markersize=3, capsize=2, label=label)
        else:
            ax.plot(xs, ys, marker="o", markersize=3, label=label)

    if spec.logy:
        ax.set_yscale("log")
    ax.set_title(spec.title)
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    svg_path = Path(svg_path)
    svg_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
