"""Report generation system with dual output (terminal + markdown).

Produces an immediate terminal summary of an experiment run and a markdown
report listing every table, plot and warning written to the output directory.
"""

from pathlib import Path
from typing import Optional

from src.analysis.acceptance import AcceptanceScale, CriterionResult
from src.domain.experiment import ExperimentConfig
from src.simulation.experiments import ExperimentOutput


class ReportGenerator:
    """Generates terminal summaries and markdown reports from experiment output."""

    def __init__(
        self,
        output: ExperimentOutput,
        config: ExperimentConfig,
        artifacts: Optional[list[Path]] = None,
        elapsed_seconds: Optional[float] = None,
    ):
        self.output = output
        self.config = config
        self.artifacts = artifacts or []
        self.elapsed_seconds = elapsed_seconds

    def _best_schemes(self) -> list[tuple[str, str]]:
        """(point label, lowest-MSE scheme) for every sweep point."""
        table = self.output.tables.get(self.output.name)
        if not table or "scheme" not in table[0]:
            return []
        best: dict[tuple, tuple[float, str]] = {}
        for row in table[1]:
            key = (row["K"], row["snr_db"])
            if key not in best or row["mse_mean"] < best[key][0]:
                best[key] = (row["mse_mean"], row["scheme"])
        return [(f"K={K}, {snr:g} dB", scheme) for (K, snr), (_, scheme) in sorted(best.items())]

    def generate_terminal_summary(self) -> str:
        """Concise terminal summary."""
        summary = f"\n{'=' * 60}\n"
        summary += f"EXPERIMENT RESULTS: {self.output.name}\n"
        summary += f"{'=' * 60}\n\n"
        summary += f"  Devices (K): {', '.join(str(k) for k in self.config.K)}\n"
        summary += f"  SNR (dB): {', '.join(f'{s:g}' for s in self.config.snr_db)} ({self.config.snr_profile})\n"
        summary += f"  Seed: {self.config.seed}\n"
        for key, value in self.output.summary.items():
            summary += f"  {key}: {value:.6g}\n" if isinstance(value, float) else f"  {key}: {value}\n"

        best = self._best_schemes()
        if best:
            summary += "\nLowest MSE per point:\n"
            for label, scheme in best[:10]:
                summary += f"  {label}: {scheme}\n"
            if len(best) > 10:
                summary += f"  ... and {len(best) - 10} more\n"

        if self.output.warnings:
            summary += f"\nWarnings: {len(self.output.warnings)}\n"
        if self.elapsed_seconds is not None:
            summary += f"\nElapsed: {self.elapsed_seconds:.1f} s\n"
        summary += f"\n{'=' * 60}\n"
        return summary

    def generate_markdown_report(self) -> str:
        """Detailed markdown report."""
        report = f"# {self.output.name} - Experiment Report\n\n"
        if self.config.description:
            report += f"{self.config.description}\n\n"

        report += "## Configuration\n\n"
        report += "| Parameter | Value |\n|-----------|-------|\n"
        for key, value in self.config.model_dump(exclude={"description"}).items():
            report += f"| {key} | {value} |\n"
        report += "\n"

        if self.output.summary:
            report += "## Summary\n\n"
            for key, value in self.output.summary.items():
                report += f"- **{key}:** {value}\n"
            report += "\n"

        best = self._best_schemes()
        if best:
            report += "## Lowest MSE per point\n\n| Point | Scheme |\n|-------|--------|\n"
            for label, scheme in best:
                report += f"| {label} | {scheme} |\n"
            report += "\n"

        if self.artifacts:
            report += "## Artifacts\n\n"
            for path in self.artifacts:
                report += f"- `{Path(path).name}`\n"
            report += "\n"

        report += "## Warnings\n\n"
        if self.output.warnings:
            for warning in self.output.warnings:
                report += f"- {warning}\n"
        else:
            report += "None.\n"
        return report

    def save_markdown_report(self, filepath: Path) -> Path:
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        filepath.write_text(self.generate_markdown_report(), encoding="utf-8")
        return filepath


def generate_acceptance_report(results: list[CriterionResult], scale: AcceptanceScale) -> str:
    """Markdown table of acceptance results with the scale they ran at."""
    passed = sum(1 for r in results if r.passed)
    report = "# Acceptance Report\n\n"
    report += f"**{passed}/{len(results)} criteria passed** (seed {scale.seed}"
    report += ", quick mode: duality-gap tolerance relaxed to 1e-3)\n\n" if scale.quick else ")\n\n"
    report += "| # | Criterion | Result | Measured | Time (s) |\n|---|-----------|--------|----------|----------|\n"
    for i, result in enumerate(results, start=1):
        status = "PASS" if result.passed else "FAIL"
        measured = result.measured.replace("|", "/")
        report += f"| {i} | {result.name} | {status} | {measured} | {result.seconds:.1f} |\n"
    return report
