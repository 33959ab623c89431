"""Experiment families: static and fading sweeps, the static demo and the
water-filling profile.

A sweep is split into independent tasks, one per (K, SNR, replicate). The
channel draws of a task depend only on (seed, K, replicate), so every scheme
and every SNR point of a replicate sees the same channels.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from src.domain.ensemble import FadingEnsemble, rayleigh_ensemble
from src.domain.experiment import ExperimentConfig, system_for_snr
from src.domain.mse import mse_ensemble
from src.domain.system import PowerPolicy, SystemConfig
from src.output.plots import PlotSpec
from src.solvers.baselines import best_traditional_cutoff, full_power_static, uniform_power_fading
from src.solvers.fading import FadingSolution, outer_solve
from src.solvers.low_complexity import TruncationPolicy, solve_lowcomplexity
from src.solvers.static import solve_static
from src.solvers.waterfilling import solve_p3

logger = logging.getLogger("aircomp.sweep")

STATIC_SCHEMES = ("optimal", "full_power", "traditional_inversion")
FADING_SCHEMES = ("optimal", "low_complexity", "uniform_power", "traditional_inversion")
COMPARE_SCHEMES = ("optimal", "low_complexity", "uniform_power")
SWEEP_SCHEMES = {
    "static_sweep_K": STATIC_SCHEMES,
    "static_sweep_snr": STATIC_SCHEMES,
    "fading_sweep_K": FADING_SCHEMES,
    "fading_sweep_snr": FADING_SCHEMES,
    "lowcomplexity_compare": COMPARE_SCHEMES,
}

SWEEP_COLUMNS = [
    "experiment",
    "snr_profile",
    "K",
    "snr_db",
    "scheme",
    "replicates",
    "mse_mean",
    "mse_stderr",
    "mse_ci_low",
    "mse_ci_high",
    "warning",
]


@dataclass(frozen=True)
class SweepTask:
    """One independent unit of a sweep."""

    experiment: str
    K: int
    snr_db: float
    replicate: int
    N: int
    seed: int
    sigma_h_sq: float
    snr_profile: str
    solver_method: str = "auto"
    tol: float = 1e-6


@dataclass(frozen=True)
class PolicyExport:
    """Per-state policy to be written as a policy CSV under a summary block."""

    ensemble: FadingEnsemble
    policy: PowerPolicy
    summary: dict[str, Any]


@dataclass
class PointResult:
    """Scaled MSE of one scheme on one task.

    export is set on replicate 0 for schemes whose policy is written out.
    """

    K: int
    snr_db: float
    replicate: int
    scheme: str
    mse: float
    warning: str = ""
    export: Optional[PolicyExport] = None


@dataclass
class ExperimentOutput:
    """Tables produced by an experiment.

    Attributes:
        name: Experiment name (also the main CSV stem)
        tables: CSV stem -> (columns, rows)
        policies: CSV stem -> per-state policy export
        plots: CSV stem -> PlotSpec
        warnings: Messages to surface in the run log
        summary: Headline numbers for the report
    """

    name: str
    tables: dict[str, tuple[list[str], list[dict[str, Any]]]] = field(default_factory=dict)
    policies: dict[str, PolicyExport] = field(default_factory=dict)
    plots: dict[str, PlotSpec] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def point_seed(seed: int, K: int, replicate: int) -> int:
    """Seed of the channel draws for (K, replicate), independent of SNR."""
    sequence = np.random.SeedSequence([seed, K, replicate])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def policy_stem(scheme: str, K: int, snr_db: float) -> str:
    """CSV stem of the replicate-0 policy of one sweep point, e.g. policy_optimal_K20_snr30dB."""
    return f"policy_{scheme}_K{K}_snr{snr_db:g}dB"


def fading_solution_summary(solution: FadingSolution) -> dict[str, Any]:
    """Header block of an optimal fading policy: prices, dual and primal values, gap."""
    summary: dict[str, Any] = {f"mu_{k + 1}": float(mu) for k, mu in enumerate(solution.mu_opt)}
    summary.update(
        dual=solution.dual_value,
        primal=solution.primal_value,
        gap=solution.gap,
        converged=solution.converged,
        method=solution.method,
    )
    return summary


def truncation_summary(policy: TruncationPolicy) -> dict[str, Any]:
    """Header block of a low-complexity policy: eta, thresholds, inversion probabilities, objective."""
    summary: dict[str, Any] = {"eta": policy.eta}
    summary.update({f"xi_{k + 1}": float(xi) for k, xi in enumerate(policy.xi)})
    summary.update({f"inversion_prob_{k + 1}": float(p) for k, p in enumerate(policy.inversion_prob)})
    summary["objective"] = policy.objective
    return summary


def build_tasks(config: ExperimentConfig) -> list[SweepTask]:
    """Every (K, SNR, replicate) combination of a sweep experiment."""
    return [
        SweepTask(
            experiment=config.experiment,
            K=K,
            snr_db=float(snr),
            replicate=r,
            N=config.N,
            seed=config.seed,
            sigma_h_sq=config.sigma_h_sq,
            snr_profile=config.snr_profile,
            solver_method=config.solver_method,
            tol=config.tol,
        )
        for K in config.K
        for snr in config.snr_db
        for r in range(config.replicates)
    ]


def _static_point(task: SweepTask, cfg: SystemConfig) -> list[PointResult]:
    ens = rayleigh_ensemble(task.K, task.N, task.sigma_h_sq, point_seed(task.seed, task.K, task.replicate))
    optimal_powers, optimal_eta = [], []
    full_powers, full_eta = [], []
    for ch in ens.states():
        solution = solve_static(cfg, ch)
        optimal_powers.append(solution.powers)
        optimal_eta.append(solution.eta_star)
        full = full_power_static(cfg, ch)
        full_powers.append(full.powers[0])
        full_eta.append(full.denoise[0])
    policies = {
        "optimal": PowerPolicy(np.array(optimal_powers), np.array(optimal_eta)),
        "full_power": PowerPolicy(np.array(full_powers), np.array(full_eta)),
        "traditional_inversion": best_traditional_cutoff(cfg, ens)[1],
    }
    return [
        PointResult(task.K, task.snr_db, task.replicate, scheme, mse_ensemble(cfg, ens, policies[scheme]).total_scaled)
        for scheme in STATIC_SCHEMES
    ]


def _fading_point(task: SweepTask, cfg: SystemConfig, schemes: tuple[str, ...]) -> list[PointResult]:
    ens = rayleigh_ensemble(task.K, task.N, task.sigma_h_sq, point_seed(task.seed, task.K, task.replicate))
    exported = task.replicate == 0
    results = []
    solution = outer_solve(cfg, ens, tol=task.tol, method=task.solver_method)
    warning = "" if solution.converged else f"dual ascent stopped after {solution.iterations} iterations"
    export = PolicyExport(ens, solution.policy, fading_solution_summary(solution)) if exported else None
    results.append(
        PointResult(task.K, task.snr_db, task.replicate, "optimal", solution.report.total_scaled, warning, export)
    )
    for scheme in schemes[1:]:
        export = None
        if scheme == "low_complexity":
            truncation = solve_lowcomplexity(cfg, ens)
            policy = truncation.to_power_policy(ens)
            report = mse_ensemble(cfg, ens, policy)
            if exported:
                export = PolicyExport(ens, policy, truncation_summary(truncation))
        elif scheme == "uniform_power":
            report = mse_ensemble(cfg, ens, uniform_power_fading(cfg, ens))
        else:
            report = best_traditional_cutoff(cfg, ens)[2]
        results.append(PointResult(task.K, task.snr_db, task.replicate, scheme, report.total_scaled, export=export))
    return results


def evaluate_task(task: SweepTask) -> list[PointResult]:
    """Evaluate all schemes of one task; module-level so worker processes can run it."""
    logger.debug(f"{task.experiment}: K={task.K}, {task.snr_db:g} dB, replicate {task.replicate}")
    cfg = system_for_snr(task.K, task.snr_db, task.snr_profile)
    schemes = SWEEP_SCHEMES.get(task.experiment)
    if schemes is STATIC_SCHEMES:
        return _static_point(task, cfg)
    if schemes is not None:
        return _fading_point(task, cfg, schemes)
    raise ValueError(f"{task.experiment} is not a sweep experiment")


def sweep_plot(config: ExperimentConfig) -> PlotSpec:
    """Plot of a sweep CSV: MSE against K or SNR, one line per scheme."""
    against_k = config.experiment.endswith("_K")
    if against_k:
        return PlotSpec(
            x="K",
            y=("mse_mean",),
            series="scheme",
            yerr="mse_stderr",
            title=f"{config.experiment} at {config.snr_db[0]:g} dB ({config.snr_profile})",
            xlabel="number of devices K",
            ylabel="MSE",
            filter=("snr_db", repr(float(config.snr_db[0]))),
        )
    return PlotSpec(
        x="snr_db",
        y=("mse_mean",),
        series="scheme",
        yerr="mse_stderr",
        title=f"{config.experiment} with K={config.K[0]} ({config.snr_profile})",
        xlabel="receive SNR (dB)",
        ylabel="MSE",
        filter=("K", str(config.K[0])),
    )


def run_static_demo(config: ExperimentConfig) -> ExperimentOutput:
    """Optimal static policy of one Rayleigh draw, listed per quality rank."""
    K, snr = config.K[0], config.snr_db[0]
    cfg = system_for_snr(K, snr, config.snr_profile)
    ch = rayleigh_ensemble(K, 1, config.sigma_h_sq, point_seed(config.seed, K, 0)).state(0)
    solution = solve_static(cfg, ch)
    diag = solution.diagnostics
    rows = []
    for rank, device in enumerate(solution.order):
        rows.append(
            {
                "rank": rank + 1,
                "device": device + 1,
                "power_gain": float(ch.power_gains[device]),
                "budget": cfg.power_budgets[device],
                "quality": float(diag.quality[rank]),
                "eta_tilde": float(diag.eta_tilde[rank]),
                "J": float(diag.J[rank]),
                "power": float(solution.powers[device]),
                "regime": "full_power" if rank < solution.k_star else "inversion",
                "eta_star": solution.eta_star,
            }
        )
    columns = ["rank", "device", "power_gain", "budget", "quality", "eta_tilde", "J", "power", "regime", "eta_star"]
    output = ExperimentOutput(name=config.experiment)
    output.tables["static_demo"] = (columns, rows)
    output.plots["static_demo"] = PlotSpec(
        x="rank",
        y=("quality", "eta_tilde", "eta_star"),
        title=f"Static policy, K={K}, {snr:g} dB: k*={solution.k_star}",
        xlabel="quality rank",
        ylabel="value",
    )
    output.summary = {
        "k_star": solution.k_star,
        "eta_star": solution.eta_star,
        "objective_unscaled": solution.objective,
        "mse_scaled": solution.objective / K**2,
    }
    return output


def run_waterfilling_profile(config: ExperimentConfig) -> ExperimentOutput:
    """Power and denoising factor of the limited device against its channel magnitude."""
    K, snr = config.K[0], config.snr_db[0]
    cfg = system_for_snr(K, snr, config.snr_profile)
    ens = rayleigh_ensemble(K, config.N, config.sigma_h_sq, point_seed(config.seed, K, 0))
    solution = solve_p3(cfg, ens, limited_device=0)
    magnitudes = np.abs(ens.gains[:, 0])
    rows = [
        {
            "state_index": int(i),
            "h1_mag": float(magnitudes[i]),
            "p1": float(solution.policy.powers[i, 0]),
            "eta": float(solution.policy.denoise[i]),
        }
        for i in np.argsort(magnitudes, kind="stable")
    ]
    output = ExperimentOutput(name=config.experiment)
    output.tables["waterfilling_profile"] = (["state_index", "h1_mag", "p1", "eta"], rows)
    output.plots["waterfilling_profile"] = PlotSpec(
        x="h1_mag",
        y=("p1",),
        title=f"Water-filling power, cutoff {solution.threshold:.3g}, peak at {solution.peak_gain:.3g}",
        xlabel="|h_1|",
        ylabel="p_1",
        logy=False,
    )
    realized = {f"E_p_{k + 1}": float(p) for k, p in enumerate(solution.realized_powers)}
    report = mse_ensemble(cfg, ens, solution.policy)
    output.tables["waterfilling_summary"] = (
        ["mu1", "threshold", "peak_gain", "budget_1", "mse_scaled"] + list(realized),
        [
            {
                "mu1": solution.mu1,
                "threshold": solution.threshold,
                "peak_gain": solution.peak_gain,
                "budget_1": cfg.power_budgets[0],
                "mse_scaled": report.total_scaled,
                **realized,
            }
        ],
    )
    output.policies["waterfilling_policy"] = PolicyExport(
        ens,
        solution.policy,
        {
            "mu_1": solution.mu1,
            "threshold": solution.threshold,
            "peak_gain": solution.peak_gain,
            "primal": report.total_unscaled,
        },
    )
    output.summary = {"mu1": solution.mu1, "threshold": solution.threshold, "peak_gain": solution.peak_gain}
    return output
