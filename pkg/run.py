"""CLI entry point: run experiments, verify acceptance criteria, export ensembles."""

import logging
import time
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

from src.analysis.acceptance import AcceptanceScale, run_acceptance
from src.cli.args import ExperimentArgs, parse_experiment_args
from src.domain.ensemble import rayleigh_ensemble
from src.domain.errors import AirCompError, ConfigError
from src.domain.experiment import ExperimentConfig
from src.io.config_loader import build_config
from src.io.csv_io import write_ensemble_csv
from src.io.logger import ExperimentLogger
from src.output.artifacts import write_artifacts
from src.output.report_generator import ReportGenerator, generate_acceptance_report
from src.simulation.batch_runner import run_experiment
from src.simulation.experiments import point_seed

logger = logging.getLogger("aircomp.cli")

# verify and export-ensemble do not need a named experiment.
COMMAND_DEFAULTS = {
    "run": {},
    "verify": {"experiment": "static_demo"},
    "export-ensemble": {"experiment": "static_demo"},
}


def configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _write_run_log(out_dir: Path, exp_logger: ExperimentLogger) -> Path:
    path = out_dir / "run.log"
    path.write_text(exp_logger.get_full_log() + "\n", encoding="utf-8")
    return path


def run_command(config: ExperimentConfig, verbose: bool) -> int:
    """Run one experiment and write its CSVs, plots, run log and report."""
    out_dir = Path(config.out_dir)
    exp_logger = ExperimentLogger(verbose=verbose)
    points = len(config.K) * len(config.snr_db)
    exp_logger.log_experiment_start(config.experiment, points, config.seed)

    def on_progress(done: int, total: int):
        exp_logger.log(f"  task {done}/{total}")

    start = time.perf_counter()
    output = run_experiment(config, verbose=verbose, on_progress=on_progress)
    elapsed = time.perf_counter() - start

    table = output.tables.get(config.experiment)
    if table is not None:
        for row in table[1]:
            exp_logger.log_point(f"K={row['K']} {row['snr_db']:g} dB", row["scheme"], row["mse_mean"], row["mse_stderr"])
    for warning in output.warnings:
        exp_logger.log_warning(warning)

    artifacts = write_artifacts(output, out_dir, plots=config.plots)
    for path in artifacts:
        exp_logger.log_artifact(path)

    report = ReportGenerator(output, config, artifacts=artifacts, elapsed_seconds=elapsed)
    report_path = report.save_markdown_report(out_dir / "report.md")
    exp_logger.log_artifact(report_path)
    exp_logger.log_experiment_end(config.experiment, elapsed)
    _write_run_log(out_dir, exp_logger)

    print(report.generate_terminal_summary())
    print(f"Results written to {out_dir}")
    return 0


def verify_command(config: ExperimentConfig, verbose: bool) -> int:
    """Run the acceptance suite; nonzero exit if any criterion fails."""
    scale = AcceptanceScale.from_config(config)
    exp_logger = ExperimentLogger(verbose=verbose, name="aircomp.verify")
    if scale.quick:
        exp_logger.log("quick mode: duality-gap tolerance relaxed to 1e-3")

    def on_result(result):
        exp_logger.log_criterion(result.name, result.passed, result.measured)
        if not verbose:
            print(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: {result.measured}")

    results = run_acceptance(scale, on_result=on_result)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "verify.md").write_text(generate_acceptance_report(results, scale), encoding="utf-8")
    _write_run_log(out_dir, exp_logger)

    failed = [r.name for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed")
    if failed:
        print(f"Failed: {', '.join(failed)}")
        return 1
    return 0


def export_command(config: ExperimentConfig) -> int:
    """Write one Rayleigh ensemble CSV per K, drawn like replicate 0 of a sweep."""
    out_dir = Path(config.out_dir)
    for K in config.K:
        ens = rayleigh_ensemble(K, config.N, config.sigma_h_sq, point_seed(config.seed, K, 0))
        path = write_ensemble_csv(out_dir / f"ensemble_K{K}_N{config.N}.csv", ens)
        print(f"Wrote {path}")
    return 0


def main(argv=None) -> int:
    """Main CLI entry point.

    Returns:
        0 on success, 1 on a failed verify or runtime error, 2 on a config error
    """
    args: ExperimentArgs = parse_experiment_args(argv)
    configure_logging(args.verbose)

    try:
        config = build_config(args.config, args.overrides, defaults=COMMAND_DEFAULTS[args.command]).effective()
    except ConfigError as e:
        print(f"Error: {e}")
        return 2

    verbose = args.verbose > 0
    try:
        if args.command == "run":
            return run_command(config, verbose)
        if args.command == "verify":
            return verify_command(config, verbose)
        return export_command(config)
    except (AirCompError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    exit(main())
