"""Sweep runner with progress tracking and replicate aggregation.

Manages execution of sweep tasks with:
- Sequential execution, or a process pool when workers > 1
- Results collected in task order, so output does not depend on scheduling
- Mean, standard error and confidence interval across replicates
"""

from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from src.analysis.statistics import mean_confidence_interval, standard_error
from src.domain.experiment import ExperimentConfig
from src.simulation.experiments import (
    SWEEP_COLUMNS,
    SWEEP_SCHEMES,
    ExperimentOutput,
    PointResult,
    SweepTask,
    build_tasks,
    evaluate_task,
    policy_stem,
    run_static_demo,
    run_waterfilling_profile,
    sweep_plot,
)


@dataclass
class SweepResults:
    """Aggregated sweep output.

    Attributes:
        rows: One row per (K, SNR, scheme) with replicate statistics
        points: Raw per-replicate results in task order
        warnings: Solver warnings raised during the sweep
    """

    rows: list[dict] = field(default_factory=list)
    points: list[PointResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class SweepRunner:
    """Runs sweep tasks and aggregates their replicates."""

    def __init__(self, workers: int = 1, verbose: bool = False):
        """Initialize sweep runner.

        Args:
            workers: Number of worker processes (1 runs in-process)
            verbose: Whether to print progress updates
        """
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.workers = workers
        self.verbose = verbose

    def run(
        self,
        tasks: list[SweepTask],
        scheme_order: tuple[str, ...],
        on_progress: Optional[Callable[[int, int], None]] = None,
    ) -> SweepResults:
        """Evaluate every task and aggregate across replicates.

        Raises:
            ValueError: If a task fails
        """
        if self.verbose:
            print(f"Running {len(tasks)} sweep tasks with {self.workers} worker(s)...")

        try:
            if self.workers == 1:
                per_task = []
                for index, task in enumerate(tasks, start=1):
                    per_task.append(evaluate_task(task))
                    if on_progress is not None:
                        on_progress(index, len(tasks))
            else:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    per_task = list(pool.map(evaluate_task, tasks))
                if on_progress is not None:
                    on_progress(len(tasks), len(tasks))
        except Exception as e:
            raise ValueError(f"Sweep failed: {e}") from e

        points = [point for results in per_task for point in results]
        rows, warnings = self._aggregate(tasks, points, scheme_order)
        if self.verbose:
            print(f"Sweep complete: {len(points)} scheme evaluations, {len(warnings)} warnings")
        return SweepResults(rows=rows, points=points, warnings=warnings)

    def _aggregate(self, tasks, points, scheme_order):
        grouped = defaultdict(list)
        for point in points:
            grouped[(point.K, point.snr_db, point.scheme)].append(point)

        experiment = tasks[0].experiment if tasks else ""
        profile = tasks[0].snr_profile if tasks else ""
        rank = {scheme: i for i, scheme in enumerate(scheme_order)}
        rows, warnings = [], []
        for (K, snr_db, scheme) in sorted(grouped, key=lambda key: (key[0], key[1], rank.get(key[2], len(rank)))):
            group = grouped[(K, snr_db, scheme)]
            values = [p.mse for p in group]
            low, high, mean = mean_confidence_interval(values)
            notes = sorted({p.warning for p in group if p.warning})
            warnings += [f"K={K}, snr={snr_db:g} dB, {scheme}: {note}" for note in notes]
            rows.append(
                {
                    "experiment": experiment,
                    "snr_profile": profile,
                    "K": K,
                    "snr_db": snr_db,
                    "scheme": scheme,
                    "replicates": len(values),
                    "mse_mean": mean,
                    "mse_stderr": standard_error(values),
                    "mse_ci_low": low,
                    "mse_ci_high": high,
                    "warning": "; ".join(notes),
                }
            )
        return rows, warnings


def run_experiment(
    config: ExperimentConfig,
    verbose: bool = False,
    on_progress: Optional[Callable[[int, int], None]] = None,
) -> ExperimentOutput:
    """Run the experiment named by config and collect its tables.

    Sweeps go through a SweepRunner with config.workers processes; the static
    demo and the water-filling profile are single solves.

    Raises:
        ValueError: If a sweep task fails
    """
    if config.experiment == "static_demo":
        return run_static_demo(config)
    if config.experiment == "waterfilling_profile":
        return run_waterfilling_profile(config)

    schemes = SWEEP_SCHEMES[config.experiment]
    results = SweepRunner(workers=config.workers, verbose=verbose).run(build_tasks(config), schemes, on_progress)
    output = ExperimentOutput(name=config.experiment, warnings=list(results.warnings))
    output.tables[config.experiment] = (SWEEP_COLUMNS, results.rows)
    for point in results.points:
        if point.export is not None:
            output.policies[policy_stem(point.scheme, point.K, point.snr_db)] = point.export
    output.plots[config.experiment] = sweep_plot(config)
    output.summary = {
        "sweep_points": len(config.K) * len(config.snr_db),
        "replicates": config.replicates,
        "N": config.N,
        "schemes": ", ".join(schemes),
    }
    return output
