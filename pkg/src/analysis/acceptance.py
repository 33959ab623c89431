"""Acceptance criteria run by the ``verify`` command.

Each criterion is a function taking an :class:`AcceptanceScale` and returning
a :class:`CriterionResult` with the measured value that decided it. The scale
comes from the experiment config: quick mode shrinks instance counts and
ensembles and relaxes the duality-gap tolerance to 1e-3.
"""

import filecmp
import logging
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from src.analysis.instances import static_instances
from src.domain.ensemble import fixed_ensemble, rayleigh_ensemble
from src.domain.experiment import QUICK_K, QUICK_N, ExperimentConfig, system_for_snr
from src.domain.mse import mse_single_state, optimal_denoise_for_powers
from src.domain.system import ChannelVector, SystemConfig
from src.simulation.experiments import point_seed
from src.simulation.monte_carlo import mse_signal_oracle
from src.solvers.fading import dual_eval, outer_solve
from src.solvers.static import (
    StaticSolution,
    asymptotic_static,
    solve_static,
    solve_static_by_enumeration,
    static_grid_objective,
    static_subproblem_objective,
)
from src.solvers.waterfilling import solve_p3

logger = logging.getLogger("aircomp.verify")

PROPERTY_TOL = 1e-9
ORACLE_RTOL = 1e-6
AGREEMENT_ATOL = 1e-12
FULL_GAP_RTOL = 1e-4
QUICK_GAP_RTOL = 1e-3
GAMMA_RESIDUAL_TOL = 1e-9
SLACKNESS_TOL = 1e-6
CROSS_MODULE_TOL = 1e-6
TIGHTNESS_RTOL = 0.01
SIGNAL_Z_MAX = 4.0
LOW_SNR_RTOL = 0.02
HIGH_SNR_RTOL = 0.05
ORDERS_AT_30_DB = 1e-2
TREND_SE_FACTOR = 3.0
MIN_FADING_N = 100

WORKED_EXAMPLE_MU = (6.0 / 6.6) ** 2
WORKED_EXAMPLE_POWERS = (0.1, 0.3)


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance criterion."""

    name: str
    passed: bool
    measured: str
    seconds: float = 0.0


@dataclass(frozen=True)
class AcceptanceScale:
    """Sizes and tolerances of one verify run.

    Attributes:
        seed: Root seed for every random instance
        instances: Random static instances for the oracle and property checks
        grid_points: Points of the brute-force eta grid
        asymptotic_instances: Instances per asymptotic regime
        fading_ensembles: Random ensembles for the duality checks
        fading_N: States per duality-check ensemble
        gap_rtol: Relative duality-gap tolerance
        tightness_N: States of the Rayleigh tightness ensemble
        trend_K: Device counts of the K sweeps
        trend_snr_db: SNR points of the static SNR sweep
        fading_snr_db: SNR points of the fading SNR sweep
        trend_N: States per sweep ensemble
        replicates: Ensemble replicates per sweep point
        signal_pairs: (policy, state) pairs for the signal-level check
        signal_draws: Transmissions simulated per pair
        workers: Worker processes for the sweeps
        quick: Whether this is the reduced quick scale
    """

    seed: int = 2024
    instances: int = 1000
    grid_points: int = 10**6
    asymptotic_instances: int = 100
    fading_ensembles: int = 10
    fading_N: int = 2000
    gap_rtol: float = FULL_GAP_RTOL
    tightness_N: int = 5000
    trend_K: tuple[int, ...] = (5, 10, 20, 30, 40, 50)
    trend_snr_db: tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0, 30.0, 60.0)
    fading_snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 20.0, 30.0)
    trend_N: int = 5000
    replicates: int = 5
    signal_pairs: int = 50
    signal_draws: int = 10**5
    workers: int = 1
    quick: bool = False

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "AcceptanceScale":
        scale = cls(seed=config.seed, workers=config.workers)
        if not config.quick:
            return scale
        quick_N = max(MIN_FADING_N, min(config.N, QUICK_N))
        return replace(
            scale,
            instances=100,
            asymptotic_instances=20,
            fading_ensembles=3,
            fading_N=quick_N,
            gap_rtol=QUICK_GAP_RTOL,
            tightness_N=quick_N,
            trend_K=tuple(QUICK_K),
            trend_snr_db=(-10.0, 10.0, 30.0, 60.0),
            fading_snr_db=(5.0, 30.0),
            trend_N=quick_N,
            replicates=min(config.replicates, 2),
            signal_pairs=10,
            signal_draws=10**4,
            quick=True,
        )


def _timed(name: str, check: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    try:
        passed, measured = check()
    except Exception as e:
        logger.exception(f"criterion {name!r} raised")
        passed, measured = False, f"raised {type(e).__name__}: {e}"
    return CriterionResult(name, passed, measured, time.perf_counter() - start)


def static_property_violations(cfg: SystemConfig, ch: ChannelVector, solution: StaticSolution) -> list[str]:
    """Structural properties every optimal static solution satisfies.

    Checks the full-power lower bound on eta*, unimodality of every F_k,
    the threshold bracket of eta*, the rank-wise membership test, the sign
    equivalence between q_k - eta_tilde and J(k), and the monotone eta_tilde
    chain. Returns one message per violation.
    """
    diag = solution.diagnostics
    q, eta_t, J = diag.quality, diag.eta_tilde, diag.J
    k_star, eta_star, sigma_sq = solution.k_star, solution.eta_star, cfg.noise_var
    K = cfg.K
    previous = np.concatenate(([np.inf], eta_t[:-1]))
    violations = []

    if eta_star < q[0] * (1 - PROPERTY_TOL):
        violations.append(f"eta*={eta_star:.6g} below the weakest quality {q[0]:.6g}")

    for k in range(1, K + 1):
        grid = eta_t[k - 1] * np.geomspace(1e-2, 1e2, 201)
        values = static_subproblem_objective(q, sigma_sq, k, grid)
        steps = np.diff(values)
        slack = PROPERTY_TOL * np.max(np.abs(values))
        if np.any(steps[:100] > slack) or np.any(steps[100:] < -slack):
            violations.append(f"F_{k} is not unimodal around its stationary point")

    if q[k_star - 1] > eta_star * (1 + PROPERTY_TOL):
        violations.append(f"q_(k*)={q[k_star - 1]:.6g} above eta*={eta_star:.6g}")
    if k_star < K and eta_star > q[k_star] * (1 + PROPERTY_TOL):
        violations.append(f"eta*={eta_star:.6g} above q_(k*+1)={q[k_star]:.6g}")
    if eta_star > np.min(eta_t) * (1 + PROPERTY_TOL):
        violations.append("eta* is not the smallest stationary point")

    for k in range(1, K + 1):
        inside = q[k - 1] <= previous[k - 1] * (1 + PROPERTY_TOL)
        outside = q[k - 1] >= previous[k - 1] * (1 - PROPERTY_TOL)
        if k <= k_star and not inside:
            violations.append(f"rank {k} is full-power but q_k exceeds eta_tilde_(k-1)")
        if k > k_star and not outside:
            violations.append(f"rank {k} inverts but q_k is below eta_tilde_(k-1)")

    scale = 1.0 + np.cumsum(q) + sigma_sq
    for k in range(1, K + 1):
        if abs(J[k - 1]) <= PROPERTY_TOL * scale[k - 1]:
            continue
        signs = {np.sign(q[k - 1] - eta_t[k - 1]), np.sign(q[k - 1] - previous[k - 1]), np.sign(J[k - 1])}
        if len(signs) != 1:
            violations.append(f"sign mismatch between q_k - eta_tilde and J at rank {k}")

    for k in range(2, K + 1):
        if k <= k_star and eta_t[k - 1] > eta_t[k - 2] * (1 + PROPERTY_TOL):
            violations.append(f"eta_tilde increases at rank {k} <= k*")
        if k > k_star and eta_t[k - 1] < eta_t[k - 2] * (1 - PROPERTY_TOL):
            violations.append(f"eta_tilde decreases at rank {k} > k*")
        if J[k - 1] < J[k - 2] - PROPERTY_TOL * scale[k - 1]:
            violations.append(f"J decreases at rank {k}")
    return violations


def check_static_oracle(scale: AcceptanceScale) -> CriterionResult:
    def check():
        worst = 0.0
        for instance in static_instances(scale.instances, scale.seed):
            solution = solve_static(instance.cfg, instance.channel)
            grid_value, _ = static_grid_objective(instance.cfg, instance.channel, scale.grid_points)
            if grid_value < solution.objective * (1 - AGREEMENT_ATOL):
                return False, f"grid beats the solver: {grid_value:.12g} < {solution.objective:.12g}"
            worst = max(worst, (grid_value - solution.objective) / solution.objective)
        return worst <= ORACLE_RTOL, f"max relative excess of grid minimum {worst:.3e} (limit {ORACLE_RTOL:g})"

    return _timed("static oracle equivalence", check)


def check_method_agreement(scale: AcceptanceScale) -> CriterionResult:
    def check():
        worst, mismatches = 0.0, 0
        for instance in static_instances(scale.instances, scale.seed):
            a = solve_static(instance.cfg, instance.channel)
            b = solve_static_by_enumeration(instance.cfg, instance.channel)
            if a.k_star != b.k_star or abs(a.eta_star - b.eta_star) > PROPERTY_TOL * a.eta_star:
                mismatches += 1
            worst = max(worst, abs(a.objective - b.objective) / max(1.0, a.objective))
        passed = mismatches == 0 and worst <= AGREEMENT_ATOL
        return passed, f"{mismatches} (k*, eta*) mismatches, max objective difference {worst:.3e}"

    return _timed("static method agreement", check)


def check_static_properties(scale: AcceptanceScale) -> CriterionResult:
    def check():
        failures = []
        for instance in static_instances(scale.instances, scale.seed):
            solution = solve_static(instance.cfg, instance.channel)
            failures += static_property_violations(instance.cfg, instance.channel, solution)
        detail = f"; first: {failures[0]}" if failures else ""
        return not failures, f"{len(failures)} violations on {scale.instances} instances{detail}"

    return _timed("static structural properties", check)


def check_asymptotics(scale: AcceptanceScale) -> CriterionResult:
    def check():
        bad = 0
        for regime, noise_var in (("high_snr", 1e-8), ("low_snr", 1e8)):
            for instance in static_instances(scale.asymptotic_instances, scale.seed + 1, noise_var=noise_var):
                solution = solve_static(instance.cfg, instance.channel)
                limit = asymptotic_static(instance.cfg, instance.channel, regime)
                target_k = 1 if regime == "high_snr" else instance.cfg.K
                close = np.allclose(solution.powers, limit.powers, rtol=1e-4, atol=0.0)
                if solution.k_star != target_k or not close:
                    bad += 1
        total = 2 * scale.asymptotic_instances
        return bad == 0, f"{bad} of {total} instances deviate from the limiting policy"

    return _timed("static asymptotics", check)


def check_fading_duality(scale: AcceptanceScale) -> CriterionResult:
    def check():
        rng = np.random.default_rng(scale.seed + 2)
        worst_gap = worst_residual = worst_slack = 0.0
        for i in range(scale.fading_ensembles):
            K = int(rng.integers(1, 6))
            snr_db = float(rng.uniform(0.0, 20.0))
            cfg = system_for_snr(K, snr_db)
            ens = rayleigh_ensemble(K, scale.fading_N, seed=point_seed(scale.seed, K, i))
            solution = outer_solve(cfg, ens, tol=1e-6)
            worst_gap = max(worst_gap, abs(solution.gap) / solution.primal_value)

            evaluation = dual_eval(cfg, ens, solution.mu_opt)
            active = evaluation.gamma > 0
            lam = ens.power_gains[active] / solution.mu_opt
            gamma = evaluation.gamma[active][:, np.newaxis]
            lhs = np.sum(lam / (lam * gamma + 1.0) ** 2, axis=1)
            if lhs.size:
                worst_residual = max(worst_residual, float(np.max(np.abs(lhs - cfg.noise_var))) / cfg.noise_var)

            slack = np.abs(solution.mu_opt * solution.constraint_residuals) / (1.0 + solution.mu_opt * cfg.budgets)
            worst_slack = max(worst_slack, float(np.max(slack)))
        passed = worst_gap <= scale.gap_rtol and worst_residual <= GAMMA_RESIDUAL_TOL and worst_slack <= SLACKNESS_TOL
        measured = (
            f"relative gap {worst_gap:.2e} (limit {scale.gap_rtol:g}{', quick mode' if scale.quick else ''}), "
            f"gamma residual {worst_residual:.2e}, slackness {worst_slack:.2e}"
        )
        return passed, measured

    return _timed("fading duality", check)


def check_single_device_oracle(scale: AcceptanceScale) -> CriterionResult:
    def check():
        cfg = SystemConfig(K=1, noise_var=1.0, power_budgets=(0.2,))
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([4.0])])
        solution = outer_solve(cfg, ens, tol=1e-10)
        worked_mu = abs(float(solution.mu_opt[0]) - WORKED_EXAMPLE_MU)
        worked_p = float(np.max(np.abs(solution.policy.powers[:, 0] - WORKED_EXAMPLE_POWERS)))

        rng = np.random.default_rng(scale.seed + 3)
        worst = 0.0
        for i in range(max(3, scale.fading_ensembles)):
            cfg = system_for_snr(1, float(rng.uniform(0.0, 20.0)))
            ens = rayleigh_ensemble(1, scale.fading_N, seed=point_seed(scale.seed, 1, 100 + i))
            fading = outer_solve(cfg, ens, tol=1e-10)
            closed = solve_p3(cfg, ens)
            diff = np.abs(fading.policy.powers[:, 0] - closed.policy.powers[:, 0]) / cfg.power_budgets[0]
            worst = max(worst, float(np.max(diff)))
        passed = worked_mu <= CROSS_MODULE_TOL and worked_p <= CROSS_MODULE_TOL and worst <= CROSS_MODULE_TOL
        return passed, f"worked example |dmu|={worked_mu:.2e} |dp|={worked_p:.2e}; closed-form deviation {worst:.2e}"

    return _timed("single-device cross check", check)


def check_budget_tightness(scale: AcceptanceScale) -> CriterionResult:
    def check():
        cfg = system_for_snr(5, 5.0)
        ens = rayleigh_ensemble(5, scale.tightness_N, seed=point_seed(scale.seed, 5, 0))
        solution = outer_solve(cfg, ens)
        worst = float(np.max(np.abs(solution.constraint_residuals) / cfg.budgets))
        return worst <= TIGHTNESS_RTOL, f"max |E[p_k] - P_k| / P_k = {worst:.2e} (limit {TIGHTNESS_RTOL:g})"

    return _timed("Rayleigh budget tightness", check)


def _sweep(experiment: str, scale: AcceptanceScale, **fields) -> dict:
    # Imported here: the sweep runner sits above this module.
    from src.simulation.batch_runner import run_experiment

    config = ExperimentConfig(
        experiment=experiment,
        N=scale.trend_N,
        replicates=scale.replicates,
        seed=scale.seed,
        workers=scale.workers,
        **fields,
    )
    _, rows = run_experiment(config).tables[experiment]
    table: dict = {}
    for row in rows:
        table[(row["K"], row["snr_db"], row["scheme"])] = (row["mse_mean"], row["mse_stderr"])
    return table


def _schemes(table: dict) -> list[str]:
    return sorted({scheme for _, _, scheme in table})


def _decreasing_in_k(table: dict) -> list[str]:
    failures = []
    for scheme in _schemes(table):
        points = sorted((K, value) for (K, _, s), value in table.items() if s == scheme)
        for (k0, (m0, s0)), (k1, (m1, s1)) in zip(points, points[1:]):
            if m1 > m0 + TREND_SE_FACTOR * (s0 + s1):
                failures.append(f"{scheme} rises from K={k0} to K={k1}")
    return failures


def _optimal_lowest(table: dict, rtol: float) -> list[str]:
    failures = []
    for (K, snr, scheme), (mean, _) in table.items():
        optimal = table[(K, snr, "optimal")][0]
        if scheme != "optimal" and optimal > mean * (1 + rtol):
            failures.append(f"{scheme} beats optimal at K={K}, {snr:g} dB")
    return failures


def excess_over_optimal(table: dict, K: int, snr: float, scheme: str) -> float:
    """Relative MSE excess of scheme over optimal at one sweep point."""
    return table[(K, snr, scheme)][0] / table[(K, snr, "optimal")][0] - 1.0


def check_sweep_trends(scale: AcceptanceScale) -> CriterionResult:
    def check():
        failures = []
        largest_K = max(scale.trend_K)
        hetero_K = [k for k in scale.trend_K if k % 5 == 0]

        static_k = _sweep("static_sweep_K", scale, K=list(scale.trend_K), snr_db=[5.0])
        hetero_k = _sweep("static_sweep_K", scale, K=hetero_K, snr_db=[5.0], snr_profile="heterogeneous")
        static_snr = _sweep("static_sweep_snr", scale, K=[20], snr_db=list(scale.trend_snr_db))
        fading_k = _sweep("fading_sweep_K", scale, K=list(scale.trend_K), snr_db=[5.0])
        fading_snr = _sweep("fading_sweep_snr", scale, K=[20], snr_db=list(scale.fading_snr_db))

        failures += _decreasing_in_k(static_k) + _decreasing_in_k(fading_k)
        for table in (static_k, hetero_k, static_snr, fading_k, fading_snr):
            failures += _optimal_lowest(table, scale.gap_rtol)

        low, high = min(scale.trend_snr_db), max(scale.trend_snr_db)
        optimal_low = static_snr[(20, low, "optimal")][0]
        full_low = static_snr[(20, low, "full_power")][0]
        low_share = full_low / optimal_low - 1.0
        if low_share > LOW_SNR_RTOL:
            failures.append(f"full power {low_share:.1%} above optimal at {low:g} dB")

        high_excess = excess_over_optimal(static_snr, 20, high, "traditional_inversion")
        if high < 25.0:
            failures.append(f"highest static SNR {high:g} dB is below 25 dB")
        elif high_excess > HIGH_SNR_RTOL:
            failures.append(f"traditional inversion {high_excess:.1%} above optimal at {high:g} dB")

        ratio_30 = fading_snr[(20, 30.0, "optimal")][0] / fading_snr[(20, 30.0, "uniform_power")][0]
        if ratio_30 > ORDERS_AT_30_DB:
            failures.append(f"optimal/uniform MSE ratio {ratio_30:.2e} at 30 dB")

        for snr in (s for s in scale.fading_snr_db if s >= 5.0):
            optimal = fading_snr[(20, snr, "optimal")][0]
            low_complexity = fading_snr[(20, snr, "low_complexity")][0]
            uniform = fading_snr[(20, snr, "uniform_power")][0]
            if not optimal <= low_complexity * (1 + scale.gap_rtol) or not low_complexity <= uniform:
                failures.append(f"low-complexity outside [optimal, uniform] at {snr:g} dB")

        for K in hetero_K:
            for scheme in _schemes(hetero_k):
                het_mean, het_se = hetero_k[(K, 5.0, scheme)]
                uni_mean, uni_se = static_k[(K, 5.0, scheme)]
                if het_mean < uni_mean - TREND_SE_FACTOR * (het_se + uni_se):
                    failures.append(f"heterogeneous {scheme} below uniform at K={K}")

        measured = (
            f"K up to {largest_K}; full power +{low_share:.2%} at {low:g} dB; "
            f"traditional inversion +{high_excess:.2%} at {high:g} dB; "
            f"optimal/uniform at 30 dB {ratio_30:.2e}"
        )
        if failures:
            measured += f"; {len(failures)} failures, first: {failures[0]}"
        return not failures, measured

    return _timed("sweep trends", check)


def check_signal_level(scale: AcceptanceScale) -> CriterionResult:
    def check():
        rng = np.random.default_rng(scale.seed + 4)
        worst_z = 0.0
        for i, instance in enumerate(static_instances(scale.signal_pairs, scale.seed + 5)):
            cfg, ch = instance.cfg, instance.channel
            powers = rng.uniform(0.0, 1.0, cfg.K) * cfg.budgets
            eta = float(optimal_denoise_for_powers(ch.power_gains, powers, cfg.noise_var)[0])
            if not np.isfinite(eta):
                continue
            eta *= float(np.exp(rng.uniform(-0.5, 0.5)))
            closed = mse_single_state(cfg, ch, powers, eta).total_scaled
            empirical, se = mse_signal_oracle(cfg, ch, powers, eta, scale.signal_draws, seed=scale.seed + i)
            worst_z = max(worst_z, abs(empirical - closed) / se)
        return worst_z <= SIGNAL_Z_MAX, f"max deviation {worst_z:.2f} standard errors (limit {SIGNAL_Z_MAX:g})"

    return _timed("signal-level validation", check)


def check_determinism(scale: AcceptanceScale) -> CriterionResult:
    def check():
        from src.output.artifacts import write_artifacts
        from src.simulation.batch_runner import run_experiment

        configs = [
            ExperimentConfig(experiment="static_sweep_snr", K=[5], snr_db=[0.0, 10.0], N=100, replicates=2, seed=scale.seed),
            ExperimentConfig(experiment="fading_sweep_snr", K=[3], snr_db=[10.0], N=100, replicates=2, seed=scale.seed),
        ]
        differing = []
        with tempfile.TemporaryDirectory() as tmp:
            for config in configs:
                first, second = Path(tmp, "a", config.experiment), Path(tmp, "b", config.experiment)
                paths = write_artifacts(run_experiment(config), first)
                write_artifacts(run_experiment(config), second)
                for path in paths:
                    if path.suffix == ".csv" and not filecmp.cmp(path, second / path.name, shallow=False):
                        differing.append(path.name)
        return not differing, "identical CSVs" if not differing else f"differing: {', '.join(differing)}"

    return _timed("determinism", check)


CRITERIA: list[Callable[[AcceptanceScale], CriterionResult]] = [
    check_static_oracle,
    check_method_agreement,
    check_static_properties,
    check_asymptotics,
    check_fading_duality,
    check_single_device_oracle,
    check_budget_tightness,
    check_sweep_trends,
    check_signal_level,
    check_determinism,
]


def run_acceptance(
    scale: AcceptanceScale,
    on_result: Optional[Callable[[CriterionResult], None]] = None,
) -> list[CriterionResult]:
    """Run every criterion in order, reporting each result as it completes."""
    results = []
    for criterion in CRITERIA:
        result = criterion(scale)
        results.append(result)
        if on_result is not None:
            on_result(result)
    return results
