import logging


class ExperimentLogger:
    """Logger for structured experiment events.

    Keeps every entry for the run log file, echoes to stdout when verbose and
    forwards warnings to the module logger so they reach stderr too.
    """

    def __init__(self, verbose: bool = False, name: str = "aircomp.run"):
        self.entries: list[str] = []
        self.warnings: list[str] = []
        self.verbose = verbose
        self._logger = logging.getLogger(name)

    def log(self, msg: str):
        """Log a generic message."""
        self.entries.append(msg)
        self._logger.debug(msg)
        if self.verbose:
            print(msg)

    def log_experiment_start(self, experiment: str, points: int, seed: int):
        self.log(f"=== {experiment}: {points} sweep points, seed {seed} ===")

    def log_point(self, label: str, scheme: str, mse_mean: float, mse_stderr: float):
        """Log one aggregated sweep result."""
        self.log(f"  {label} {scheme}: MSE {mse_mean:.6g} (+/- {mse_stderr:.2g})")

    def log_warning(self, msg: str):
        """Record a warning (e.g. a solver that hit its iteration cap)."""
        self.warnings.append(msg)
        self.entries.append(f"WARNING: {msg}")
        self._logger.warning(msg)

    def log_artifact(self, path):
        self.log(f"  wrote {path}")

    def log_criterion(self, name: str, passed: bool, measured: str):
        status = "PASS" if passed else "FAIL"
        self.log(f"[{status}] {name}: {measured}")

    def log_experiment_end(self, experiment: str, seconds: float):
        self.log(f"\n{experiment} finished in {seconds:.1f} s with {len(self.warnings)} warnings")

    def get_full_log(self) -> str:
        """Return the complete run log as a single string."""
        return "\n".join(self.entries)
