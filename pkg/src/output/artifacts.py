"""Write experiment tables, policies and optionally plots to an output directory."""

import logging
from pathlib import Path

from src.io.csv_io import write_policy_csv, write_table
from src.output.plots import plot_csv
from src.simulation.experiments import ExperimentOutput

logger = logging.getLogger("aircomp.output")


def write_artifacts(output: ExperimentOutput, out_dir: Path, plots: bool = False) -> list[Path]:
    """One CSV per table and per exported policy, plus one SVG per plotted table when plots is set.

    SVGs are drawn from the CSVs just written, never from in-memory results.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, (columns, rows) in output.tables.items():
        csv_path = write_table(out_dir / f"{stem}.csv", columns, rows)
        written.append(csv_path)
        if plots and stem in output.plots:
            written.append(plot_csv(csv_path, out_dir / f"{stem}.svg", output.plots[stem]))
    for stem, export in output.policies.items():
        written.append(write_policy_csv(out_dir / f"{stem}.csv", export.ensemble, export.policy, export.summary))
    logger.info(f"wrote {len(written)} artifacts to {out_dir}")
    return written
