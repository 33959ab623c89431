"""CLI argument parsing for the experiment runner.

Provides argument parsing for the main CLI entry point with support for:
- Three commands: run an experiment, verify the acceptance suite, export an ensemble
- Experiment presets (JSON or markdown frontmatter) with flag overrides
- Deterministic seeds and quick mode
- Verbose output control
"""

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, get_args

from src.domain.experiment import ExperimentName

EXPERIMENTS = get_args(ExperimentName)


@dataclass
class ExperimentArgs:
    """Parsed command-line arguments.

    Attributes:
        command: One of run, verify, export-ensemble
        config: Preset file (None uses flags and defaults only)
        overrides: Config fields given as flags; None means not given
        verbose: Verbosity level (0 warnings, 1 info, 2 debug)
    """

    command: str
    config: Optional[Path]
    overrides: dict[str, Any] = field(default_factory=dict)
    verbose: int = 0


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, metavar="PATH", help="Experiment preset (.md or .json)")
    parser.add_argument("--experiment", choices=EXPERIMENTS, default=None, help="Experiment to run")
    parser.add_argument("--K", type=int, nargs="+", default=None, metavar="K", help="Number(s) of devices")
    parser.add_argument("--snr-db", type=float, nargs="+", default=None, metavar="DB", help="Receive SNR(s) in dB")
    parser.add_argument(
        "--snr-profile", choices=["uniform", "heterogeneous"], default=None, help="Per-device SNR profile"
    )
    parser.add_argument("--N", type=int, default=None, metavar="N", help="Fading states per ensemble")
    parser.add_argument("--replicates", type=int, default=None, metavar="R", help="Ensemble replicates per point")
    parser.add_argument("--seed", type=int, default=None, metavar="U64", help="Root seed of all channel draws")
    parser.add_argument("--out", type=str, default=None, metavar="DIR", help="Output directory")
    parser.add_argument("--quick", action="store_true", default=None, help="Reduced sizes for a fast pass")
    parser.add_argument("--plots", action="store_true", default=None, help="Also write SVG plots")
    parser.add_argument("--workers", type=int, default=None, metavar="W", help="Worker processes for sweeps")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More output (-vv for debug logs)")


def parse_experiment_args(args=None) -> ExperimentArgs:
    """Parse command line arguments.

    Example usage:
        python run.py run --config data/experiments/fading_sweep_snr.md --plots

    Args:
        args: Command line arguments (None to use sys.argv)

    Returns:
        ExperimentArgs dataclass with parsed arguments
    """
    parser = argparse.ArgumentParser(
        description="Power control for over-the-air computation: solvers and experiment runner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
 Examples:
   # Static demo from a preset
   python run.py run --config data/experiments/static_demo.md

   # Fading SNR sweep with plots, fixed seed
   python run.py run --experiment fading_sweep_snr --K 20 --snr-db 0 10 20 30 --seed 7 --plots

   # Quick pass over a sweep, four worker processes
   python run.py run --config data/experiments/fading_sweep_K.md --quick --workers 4

   # Acceptance suite at reduced scale
   python run.py verify --quick

   # Export a Rayleigh ensemble
   python run.py export-ensemble --K 5 --N 1000 --seed 42 --out ensembles

 Precedence: flags > config file > AIRCOMP_* environment variables > defaults.
        """,
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command, help_text in (
        ("run", "Run an experiment and write CSV tables (and SVG plots)"),
        ("verify", "Run the acceptance criteria and report pass/fail"),
        ("export-ensemble", "Write a Rayleigh fading ensemble to CSV"),
    ):
        _add_shared_flags(subparsers.add_parser(command, help=help_text))

    parsed = parser.parse_args(args)

    if parsed.workers is not None and parsed.workers <= 0:
        parser.error("--workers must be a positive integer")
    if parsed.N is not None and parsed.N <= 0:
        parser.error("--N must be a positive integer")

    overrides = {
        "experiment": parsed.experiment,
        "K": parsed.K,
        "snr_db": parsed.snr_db,
        "snr_profile": parsed.snr_profile,
        "N": parsed.N,
        "replicates": parsed.replicates,
        "seed": parsed.seed,
        "out_dir": parsed.out,
        "quick": parsed.quick,
        "plots": parsed.plots,
        "workers": parsed.workers,
    }
    return ExperimentArgs(
        command=parsed.command,
        config=parsed.config,
        overrides={k: v for k, v in overrides.items() if v is not None},
        verbose=parsed.verbose,
    )
