"""Optimal power control over a fading ensemble by Lagrange duality.

Relaxing the average power budgets with prices mu_k >= 0 decouples the
problem across fading states. In each state, with gamma = 1/eta and
lambda_k = |h_k|^2 / mu_k, the inner problem reduces to the scalar convex
program

    min_{gamma >= 0}  sum_k 1 / (lambda_k gamma + 1) + gamma sigma^2

whose optimality condition is sum_k lambda_k / (lambda_k gamma + 1)^2 = sigma^2.
The powers then follow the regularized channel inversion

    p_k = |h_k|^2 eta / (|h_k|^2 + eta mu_k)^2.

The outer problem maximizes the concave dual function over mu with the
ellipsoid method (interval bisection when K = 1). For large K the ellipsoid
needs O(K^2) cuts per digit, so the dual is instead maximized over log mu
with L-BFGS-B: optimal prices span many decades at high SNR, and every
stationary point in log coordinates is a KKT point of the concave dual.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from src.domain.ensemble import FadingEnsemble
from src.domain.errors import InvalidArgumentError, UnboundedDualError
from src.domain.mse import mse_ensemble, optimal_denoise_for_powers
from src.domain.system import SILENT, ChannelVector, MseReport, PowerPolicy, SystemConfig

logger = logging.getLogger("aircomp.fading")

GAMMA_RESIDUAL_RTOL = 1e-10
GAMMA_WIDTH_RTOL = 1e-13
GAMMA_MAX_ITER = 200
MU_MAX = 1e6
MU_FLOOR_FRACTION = 1e-12
ELLIPSOID_AUTO_MAX_K = 30
QUASI_NEWTON_MAX_ITER = 2000
SUBGRADIENT_MAX_ITER = 20_000
ROUNDING_RTOL = 1e-12

OuterMethod = Literal["auto", "ellipsoid", "quasi_newton", "subgradient"]


@dataclass(frozen=True)
class DualEvaluation:
    """Dual function value, supergradient and minimizing policy at one price vector."""

    mu: np.ndarray
    dual_value: float
    subgradient: np.ndarray
    policy: PowerPolicy
    gamma: np.ndarray


@dataclass(frozen=True)
class DualState:
    """Iteration state of the outer dual ascent.

    best_dual never decreases; mu holds the prices of the best point so far.
    """

    mu: np.ndarray
    ellipsoid_center: np.ndarray
    ellipsoid_shape: np.ndarray
    iteration: int = 0
    best_dual: float = -np.inf


@dataclass(frozen=True)
class FadingSolution:
    """Recovered primal policy with its dual certificate.

    Attributes:
        policy: Per-state powers and denoising factors
        mu_opt: Dual prices the policy was recovered from
        dual_value: Dual function value at mu_opt
        primal_value: Unscaled ensemble MSE of the policy
        gap: primal_value - dual_value
        constraint_residuals: E[p_k] - P_k
        iterations: Outer iterations performed
        converged: Whether the stopping rule was met before max_iter
        method: Outer method that produced mu_opt
        restored_devices: Devices whose powers were scaled to restore feasibility
    """

    policy: PowerPolicy
    mu_opt: np.ndarray
    dual_value: float
    primal_value: float
    gap: float
    constraint_residuals: np.ndarray
    report: MseReport
    iterations: int
    converged: bool
    method: str
    restored_devices: tuple[int, ...] = field(default=())

    def slack_devices(self, budgets: Sequence[float], rtol: float = 0.01) -> tuple[int, ...]:
        """Devices whose average power stays more than rtol below their budget."""
        budgets = np.asarray(budgets, dtype=float)
        return tuple(int(k) for k in np.flatnonzero(self.constraint_residuals < -rtol * budgets))


def _price_ratios(power_gains: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """lambda = |h|^2 / mu with inf for zero prices and 0 for dead channels."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mu > 0, power_gains / np.where(mu > 0, mu, 1.0), np.inf)
    return np.where(power_gains > 0, ratio, 0.0)


def _gamma_roots(
    power_gains: np.ndarray,
    mu: np.ndarray,
    noise_var: float,
    gamma_hint: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solve the inner optimality condition for every state at once.

    Rows whose finite-price terms cannot exceed sigma^2 at gamma = 0 are
    silent (gamma = 0). The root is found by safeguarded Newton steps inside
    a shrinking bracket, which keeps the bracket monotone.

    Raises:
        UnboundedDualError: If a zero-price device would need unbounded power
    """
    lam = _price_ratios(power_gains, mu)
    infinite = np.isinf(lam)
    finite_lam = np.where(infinite, 0.0, lam)
    at_zero = finite_lam.sum(axis=1)
    has_infinite = infinite.any(axis=1)
    active = at_zero > noise_var
    if np.any(has_infinite & ~active):
        raise UnboundedDualError(
            "zero dual price on a device with a live channel while the remaining devices "
            "cannot pin the denoising factor; inverting powers are unbounded"
        )

    gamma = np.zeros(power_gains.shape[0])
    if not np.any(active):
        return gamma

    lam = finite_lam[active]

    def lhs(g):
        return np.sum(lam / (lam * g[:, np.newaxis] + 1.0) ** 2, axis=1)

    # Each term is below 1/(lambda gamma^2), so this gamma already undershoots sigma^2.
    with np.errstate(divide="ignore"):
        inverse = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
    hi = np.sqrt(inverse.sum(axis=1) / noise_var)
    while np.any(lhs(hi) >= noise_var):
        hi = np.where(lhs(hi) >= noise_var, 2.0 * hi, hi)
    lo = np.zeros_like(hi)

    g = 0.5 * hi
    if gamma_hint is not None:
        hint = np.asarray(gamma_hint, dtype=float)[active]
        g = np.where((hint > lo) & (hint < hi), hint, g)

    done = np.zeros(g.shape, dtype=bool)
    for _ in range(GAMMA_MAX_ITER):
        denom = lam * g[:, np.newaxis] + 1.0
        residual = np.sum(lam / denom**2, axis=1) - noise_var
        slope = -2.0 * np.sum(lam**2 / denom**3, axis=1)
        done = done | (np.abs(residual) <= GAMMA_RESIDUAL_RTOL * noise_var) | (hi - lo <= GAMMA_WIDTH_RTOL * hi)
        if np.all(done):
            break
        lo = np.where(~done & (residual > 0), g, lo)
        hi = np.where(~done & (residual < 0), g, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = g - residual / slope
        inside = (newton > lo) & (newton < hi)
        g = np.where(done, g, np.where(inside, newton, 0.5 * (lo + hi)))
    else:
        logger.warning(f"inner root finding stopped after {GAMMA_MAX_ITER} iterations")

    gamma[active] = g
    return gamma


def _powers_from_gamma(power_gains: np.ndarray, mu: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Regularized channel inversion written in gamma = 1/eta.

    p = |h|^2 gamma / (|h|^2 gamma + mu)^2, which is 0 on silent states.
    """
    g = gamma[:, np.newaxis]
    denom = power_gains * g + mu[np.newaxis, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        powers = np.where(denom > 0, power_gains * g / np.where(denom > 0, denom, 1.0) ** 2, 0.0)
    return powers


def inner_gamma_solve(ch: ChannelVector, mu: Sequence[float], sigma_sq: float) -> tuple[float, float]:
    """Optimal gamma* and eta* = 1/gamma* of one state at prices mu.

    Returns:
        Tuple of (gamma*, eta*); (0.0, SILENT) when the state stays silent

    Raises:
        InvalidArgumentError: On negative prices, negative noise or size mismatch
        UnboundedDualError: If a zero-price device would need unbounded power

    Examples:
        >>> inner_gamma_solve(ChannelVector.from_power_gains([1.0]), [1.0], 0.25)
        (1.0..., 1.0...)  # root of 1/(gamma+1)^2 = 1/4
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (ch.K,):
        raise InvalidArgumentError(f"expected {ch.K} prices, got shape {mu.shape}")
    if np.any(mu < 0):
        raise InvalidArgumentError(f"prices must be nonnegative, got {mu.tolist()}")
    if not sigma_sq > 0:
        raise InvalidArgumentError(f"sigma_sq must be positive, got {sigma_sq}")
    gamma = float(_gamma_roots(ch.power_gains[np.newaxis, :], mu, sigma_sq)[0])
    return gamma, (SILENT if gamma == 0 else 1.0 / gamma)


def inner_power(ch: ChannelVector, mu: Sequence[float], eta: float) -> np.ndarray:
    """Regularized channel inversion p_k = |h_k|^2 eta / (|h_k|^2 + eta mu_k)^2.

    A zero price gives exact inversion eta/|h_k|^2; eta = inf gives zero power.

    Raises:
        InvalidArgumentError: If eta <= 0, or eta = inf meets a zero price
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (ch.K,):
        raise InvalidArgumentError(f"expected {ch.K} prices, got shape {mu.shape}")
    if np.any(mu < 0):
        raise InvalidArgumentError(f"prices must be nonnegative, got {mu.tolist()}")
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    if np.isinf(eta) and np.any((mu == 0) & (ch.power_gains > 0)):
        raise InvalidArgumentError("eta = inf with a zero price is an indeterminate limit")
    gamma = np.array([0.0 if np.isinf(eta) else 1.0 / eta])
    return _powers_from_gamma(ch.power_gains[np.newaxis, :], mu, gamma)[0]


def _evaluate(cfg: SystemConfig, ens: FadingEnsemble, mu: np.ndarray, gamma_hint=None) -> DualEvaluation:
    power_gains = ens.power_gains
    gamma = _gamma_roots(power_gains, mu, cfg.noise_var, gamma_hint)
    powers = _powers_from_gamma(power_gains, mu, gamma)

    lam = _price_ratios(power_gains, mu)
    with np.errstate(invalid="ignore"):
        terms = np.where(np.isinf(lam), 0.0, 1.0 / (np.where(np.isinf(lam), 0.0, lam) * gamma[:, np.newaxis] + 1.0))
    # Silent rows: every device contributes exactly one, no noise term.
    lagrangian = np.where(gamma > 0, terms.sum(axis=1) + gamma * cfg.noise_var, float(cfg.K))

    with np.errstate(divide="ignore"):
        denoise = np.where(gamma > 0, 1.0 / np.where(gamma > 0, gamma, 1.0), SILENT)
    expected = ens.weights @ powers
    budgets = cfg.budgets
    return DualEvaluation(
        mu=mu.copy(),
        dual_value=float(ens.weights @ lagrangian - mu @ budgets),
        subgradient=expected - budgets,
        policy=PowerPolicy(powers, denoise),
        gamma=gamma,
    )


def dual_eval(cfg: SystemConfig, ens: FadingEnsemble, mu: Sequence[float]) -> DualEvaluation:
    """Dual function G(mu), its supergradient E[p_k] - P_k and the minimizing policy.

    All states are solved together as one vectorized map followed by a
    weighted reduction.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (cfg.K,):
        raise InvalidArgumentError(f"expected {cfg.K} prices, got shape {mu.shape}")
    if np.any(mu < 0):
        raise InvalidArgumentError(f"prices must be nonnegative, got {mu.tolist()}")
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"ensemble has {ens.K} devices, config has K={cfg.K}")
    return _evaluate(cfg, ens, mu)


def _kkt_satisfied(mu: np.ndarray, residual: np.ndarray, budgets: np.ndarray, tol: float) -> bool:
    feasible = np.all(residual <= tol * budgets)
    slack = np.all(np.abs(mu * residual) <= tol * (1.0 + mu * budgets))
    return bool(feasible and slack)


def _dual_box(cfg: SystemConfig, mu_max: float) -> tuple[np.ndarray, np.ndarray]:
    # G(mu*) >= 0 and G(mu) <= K - mu . P bound every optimal price by K / P_k.
    upper = np.minimum(mu_max, cfg.K / cfg.budgets)
    return MU_FLOOR_FRACTION * upper, upper


def _ellipsoid_step(center: np.ndarray, shape: np.ndarray, cut: np.ndarray):
    """Central-cut update keeping {x : cut . (x - center) <= 0}."""
    n = center.size
    scale = float(np.sqrt(cut @ shape @ cut))
    if scale == 0:
        return center, shape
    direction = shape @ cut / scale
    if n == 1:
        return center - 0.5 * direction, shape / 4.0
    center = center - direction / (n + 1)
    shape = (n**2 / (n**2 - 1.0)) * (shape - (2.0 / (n + 1)) * np.outer(direction, direction))
    return center, 0.5 * (shape + shape.T)


def _run_ellipsoid(cfg, ens, tol, max_iter, mu_max):
    budgets = cfg.budgets
    floor, upper = _dual_box(cfg, mu_max)
    center = np.clip(1.0 / budgets, floor, upper)
    radius = np.sqrt(cfg.K) * np.maximum(center - floor, upper - center)
    state = DualState(mu=center.copy(), ellipsoid_center=center, ellipsoid_shape=np.diag(radius**2))

    best: Optional[DualEvaluation] = None
    gamma_hint = None
    converged = False
    while state.iteration < max_iter:
        center = state.ellipsoid_center
        below = np.flatnonzero(center < floor)
        above = np.flatnonzero(center > upper)
        if below.size or above.size:
            cut = np.zeros(cfg.K)
            if below.size:
                cut[below[0]] = -1.0
            else:
                cut[above[0]] = 1.0
            new_center, new_shape = _ellipsoid_step(center, state.ellipsoid_shape, cut)
            state = replace(state, ellipsoid_center=new_center, ellipsoid_shape=new_shape, iteration=state.iteration + 1)
            continue

        evaluation = _evaluate(cfg, ens, center, gamma_hint)
        gamma_hint = evaluation.gamma
        if best is None or evaluation.dual_value > best.dual_value:
            best = evaluation
            state = replace(state, mu=center.copy(), best_dual=evaluation.dual_value)

        cut = -evaluation.subgradient
        bound = float(np.sqrt(cut @ state.ellipsoid_shape @ cut))
        kkt = _kkt_satisfied(center, evaluation.subgradient, budgets, tol)
        if kkt and bound <= tol * max(1.0, abs(state.best_dual)):
            best = evaluation
            converged = True
            break
        if bound == 0.0:
            converged = kkt
            best = evaluation
            break
        new_center, new_shape = _ellipsoid_step(center, state.ellipsoid_shape, cut)
        state = replace(state, ellipsoid_center=new_center, ellipsoid_shape=new_shape, iteration=state.iteration + 1)

    if best is None:
        best = _evaluate(cfg, ens, np.clip(state.ellipsoid_center, floor, upper))
    return best, state.iteration, converged


def _run_quasi_newton(cfg, ens, tol, max_iter, mu_max):
    """L-BFGS-B on nu = log mu, stopped as soon as an iterate meets the KKT test."""
    budgets = cfg.budgets
    floor, upper = _dual_box(cfg, mu_max)
    start = np.log(np.clip(1.0 / budgets, floor, upper))
    bounds = list(zip(np.log(floor), np.log(upper)))

    best: Optional[DualEvaluation] = None
    latest: dict[bytes, DualEvaluation] = {}
    gamma_hint = None
    converged = False

    def negative_dual(nu: np.ndarray):
        nonlocal best, gamma_hint
        mu = np.clip(np.exp(nu), floor, upper)
        evaluation = _evaluate(cfg, ens, mu, gamma_hint)
        gamma_hint = evaluation.gamma
        latest.clear()
        latest[nu.tobytes()] = evaluation
        if best is None or evaluation.dual_value > best.dual_value:
            best = evaluation
        # d G(exp(nu)) / d nu_k = mu_k (E[p_k] - P_k)
        return -evaluation.dual_value, -mu * evaluation.subgradient

    def stop_at_kkt(intermediate_result):
        nonlocal best, converged
        nu = np.asarray(intermediate_result.x, dtype=float)
        evaluation = latest.get(nu.tobytes())
        if evaluation is None:
            evaluation = _evaluate(cfg, ens, np.clip(np.exp(nu), floor, upper), gamma_hint)
        if _kkt_satisfied(evaluation.mu, evaluation.subgradient, budgets, tol):
            best = evaluation
            converged = True
            raise StopIteration

    result = minimize(
        negative_dual,
        start,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        callback=stop_at_kkt,
        options={"maxiter": max_iter, "maxfun": 20 * max_iter, "ftol": 0.0, "gtol": 0.0},
    )
    if not converged:
        logger.debug(f"L-BFGS-B stopped: {result.message}")
        converged = _kkt_satisfied(best.mu, best.subgradient, budgets, tol)
    return best, int(result.nit), converged


def _run_subgradient(cfg, ens, tol, max_iter, mu_max, step_scale: float = 1.0):
    """Multiplicative price adjustment mu_k <- mu_k exp(step r_k) on relative residuals r."""
    budgets = cfg.budgets
    floor, upper = _dual_box(cfg, mu_max)
    mu = np.clip(1.0 / budgets, floor, upper)
    best: Optional[DualEvaluation] = None
    gamma_hint = None
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        evaluation = _evaluate(cfg, ens, mu, gamma_hint)
        gamma_hint = evaluation.gamma
        if best is None or evaluation.dual_value > best.dual_value:
            best = evaluation
        if _kkt_satisfied(mu, evaluation.subgradient, budgets, tol):
            best = evaluation
            converged = True
            break
        step = step_scale / np.sqrt(iteration)
        relative = np.clip(evaluation.subgradient / budgets, -1.0, 1.0)
        mu = np.clip(mu * np.exp(step * relative), floor, upper)
    return best, iteration, converged


def _restore_feasibility(cfg, ens, policy: PowerPolicy, tol: float):
    """Scale down devices that exceed their budget, then re-fit eta per state."""
    budgets = cfg.budgets
    expected = policy.expected_powers(ens.weights)
    over = np.flatnonzero(expected > budgets * (1.0 + ROUNDING_RTOL))
    if over.size == 0:
        return policy, ()
    powers = np.array(policy.powers)
    for k in over:
        excess = expected[k] / budgets[k] - 1.0
        message = f"device {k} exceeds its budget by {excess:.3e} (relative); scaling its powers down"
        if excess > tol:
            logger.warning(message)
        else:
            logger.debug(message)
        powers[:, k] *= budgets[k] / expected[k]
    denoise = optimal_denoise_for_powers(ens.power_gains, powers, cfg.noise_var)
    powers[np.isinf(denoise)] = 0.0
    return PowerPolicy(powers, denoise), tuple(int(k) for k in over)


def outer_solve(
    cfg: SystemConfig,
    ens: FadingEnsemble,
    tol: float = 1e-6,
    max_iter: Optional[int] = None,
    mu_max: float = MU_MAX,
    method: OuterMethod = "auto",
) -> FadingSolution:
    """Maximize the dual function and recover the optimal fading policy.

    Args:
        cfg: System configuration
        ens: Fading ensemble
        tol: Relative tolerance for dual suboptimality and KKT residuals
        max_iter: Iteration cap (default 500 K^2 for the ellipsoid method,
            2000 for quasi-Newton, 20000 for the subgradient method)
        mu_max: Upper end of the price box
        method: Outer method; "auto" uses the ellipsoid method up to K = 30
            and quasi-Newton beyond

    Returns:
        FadingSolution; converged is False if max_iter was reached

    Raises:
        InvalidArgumentError: On invalid arguments
    """
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"ensemble has {ens.K} devices, config has K={cfg.K}")
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    if not mu_max > 0:
        raise InvalidArgumentError(f"mu_max must be positive, got {mu_max}")
    if method == "auto":
        method = "ellipsoid" if cfg.K <= ELLIPSOID_AUTO_MAX_K else "quasi_newton"
    runners = {"ellipsoid": _run_ellipsoid, "quasi_newton": _run_quasi_newton, "subgradient": _run_subgradient}
    if method not in runners:
        raise InvalidArgumentError(f"unknown method {method!r}")
    if max_iter is None:
        max_iter = {
            "ellipsoid": 500 * cfg.K**2,
            "quasi_newton": QUASI_NEWTON_MAX_ITER,
            "subgradient": SUBGRADIENT_MAX_ITER,
        }[method]
    if max_iter <= 0:
        raise InvalidArgumentError(f"max_iter must be positive, got {max_iter}")

    dead = np.flatnonzero(np.all(ens.power_gains == 0, axis=0))
    if dead.size:
        logger.warning(f"devices {dead.tolist()} have zero gain in every state and never transmit")

    runner = runners[method]
    evaluation, iterations, converged = runner(cfg, ens, tol, max_iter, mu_max)
    if not converged:
        logger.warning(f"{method} dual ascent did not converge in {max_iter} iterations; using best point")
    logger.info(f"dual ascent ({method}) finished after {iterations} iterations, G = {evaluation.dual_value:.8g}")

    policy, restored = _restore_feasibility(cfg, ens, evaluation.policy, tol)
    report = mse_ensemble(cfg, ens, policy)
    residuals = policy.expected_powers(ens.weights) - cfg.budgets
    solution = FadingSolution(
        policy=policy,
        mu_opt=evaluation.mu,
        dual_value=evaluation.dual_value,
        primal_value=report.total_unscaled,
        gap=report.total_unscaled - evaluation.dual_value,
        constraint_residuals=residuals,
        report=report,
        iterations=iterations,
        converged=converged,
        method=method,
        restored_devices=restored,
    )
    slack = solution.slack_devices(cfg.budgets)
    if slack:
        logger.warning(f"budgets of devices {list(slack)} are not tight at the optimum")
    return solution
