"""Optimal power control for a static channel.

Devices are ranked by their quality indicator q_k = P_k|h_k|^2. The optimal
policy has a threshold structure: the k* weakest devices transmit at full
power and the rest invert their channels to the common level eta*.

For the k weakest devices at full power the objective restricted to the
interval [q_k, q_{k+1}] is

    F_k(eta) = sum_{i<=k} (sqrt(q_i)/sqrt(eta) - 1)^2 + sigma^2/eta

whose unique stationary point is

    eta_tilde_k = ((sigma^2 + sum_{i<=k} q_i) / sum_{i<=k} sqrt(q_i))^2.

The threshold index is the minimizer of eta_tilde_k, equivalently the last
k with J(k) < 0 where J(k) = sum_{i<k} sqrt(q_i)(sqrt(q_k) - sqrt(q_i)) - sigma^2.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.domain.errors import DegenerateChannelError, InternalConsistencyError, InvalidArgumentError
from src.domain.mse import mse_single_state
from src.domain.system import ChannelVector, PowerPolicy, SystemConfig

logger = logging.getLogger("aircomp.static")

# Relative slack for the structural checks on the returned solution.
CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class StaticDiagnostics:
    """Per-rank quantities behind a static solution (sorted order).

    Attributes:
        quality: Nondecreasing quality indicators P_k|h_k|^2
        eta_tilde: Stationary points of F_1..F_K
        J: Threshold function values J(1)..J(K), J(1) = -sigma^2
    """

    quality: np.ndarray
    eta_tilde: np.ndarray
    J: np.ndarray


@dataclass(frozen=True)
class StaticSolution:
    """Optimal static policy.

    Attributes:
        order: order[r] is the original index of the device ranked r (0-based)
        k_star: Number of devices at full power (1..K)
        eta_star: Optimal denoising factor
        powers: Transmit powers in original device order
        objective: Unscaled MSE of the policy
        diagnostics: Sorted quality indicators, stationary points and J(k)
    """

    order: tuple[int, ...]
    k_star: int
    eta_star: float
    powers: np.ndarray
    objective: float
    diagnostics: StaticDiagnostics

    @property
    def policy(self) -> PowerPolicy:
        return PowerPolicy.single(self.powers, self.eta_star)

    @property
    def full_power_devices(self) -> tuple[int, ...]:
        """Original indices of the devices transmitting at full power."""
        return self.order[: self.k_star]


def quality_order(cfg: SystemConfig, ch: ChannelVector) -> tuple[np.ndarray, np.ndarray]:
    """Stable ascending ranking of devices by quality indicator.

    Returns:
        Tuple of (order, sorted quality indicators)
    """
    if ch.K != cfg.K:
        raise InvalidArgumentError(f"channel has {ch.K} devices, config has K={cfg.K}")
    quality = cfg.budgets * ch.power_gains
    order = np.argsort(quality, kind="stable")
    return order, quality[order]


def eta_tilde_sequence(quality_sorted: np.ndarray, noise_var: float) -> np.ndarray:
    """Stationary points eta_tilde_1..eta_tilde_K for sorted quality indicators.

    noise_var may be zero here, unlike in SystemConfig.
    """
    if noise_var < 0:
        raise InvalidArgumentError(f"noise_var must be nonnegative, got {noise_var}")
    quality_sorted = np.asarray(quality_sorted, dtype=float)
    return ((noise_var + np.cumsum(quality_sorted)) / np.cumsum(np.sqrt(quality_sorted))) ** 2


def threshold_function(quality_sorted: np.ndarray, noise_var: float) -> np.ndarray:
    """J(1)..J(K); J(k) < 0 exactly when device k belongs to the full-power group."""
    quality_sorted = np.asarray(quality_sorted, dtype=float)
    root = np.sqrt(quality_sorted)
    root_before = np.concatenate(([0.0], np.cumsum(root)[:-1]))
    quality_before = np.concatenate(([0.0], np.cumsum(quality_sorted)[:-1]))
    return root * root_before - quality_before - noise_var


def static_subproblem_objective(
    quality_sorted: np.ndarray, noise_var: float, k: int, eta
) -> np.ndarray:
    """F_k(eta): unscaled MSE with the k weakest devices at full power and the
    remaining devices inverting exactly. Vectorized over eta."""
    if not 1 <= k <= len(quality_sorted):
        raise InvalidArgumentError(f"k must be in 1..{len(quality_sorted)}, got {k}")
    eta = np.asarray(eta, dtype=float)
    root = np.sqrt(np.asarray(quality_sorted[:k], dtype=float))
    ratio = root[:, np.newaxis] / np.sqrt(np.atleast_1d(eta))[np.newaxis, :]
    values = np.sum((ratio - 1.0) ** 2, axis=0) + noise_var / np.atleast_1d(eta)
    return values.reshape(eta.shape)


def eta_tilde(cfg: SystemConfig, ch: ChannelVector, k: int) -> float:
    """Stationary point of F_k, with k the 1-based rank in quality order."""
    if not 1 <= k <= cfg.K:
        raise InvalidArgumentError(f"k must be in 1..{cfg.K}, got {k}")
    _, quality_sorted = quality_order(cfg, ch)
    return float(eta_tilde_sequence(quality_sorted, cfg.noise_var)[k - 1])


def _prepare(cfg: SystemConfig, ch: ChannelVector):
    if ch.K != cfg.K:
        raise InvalidArgumentError(f"channel has {ch.K} devices, config has K={cfg.K}")
    if np.any(ch.power_gains == 0):
        dead = np.flatnonzero(ch.power_gains == 0).tolist()
        raise DegenerateChannelError(f"devices {dead} have zero channel gain; channel inversion is undefined")
    order, quality_sorted = quality_order(cfg, ch)
    diagnostics = StaticDiagnostics(
        quality=quality_sorted,
        eta_tilde=eta_tilde_sequence(quality_sorted, cfg.noise_var),
        J=threshold_function(quality_sorted, cfg.noise_var),
    )
    return order, diagnostics


def _assemble(cfg, ch, order, k_star, eta_star, diagnostics) -> StaticSolution:
    budgets = cfg.budgets
    power_gains = ch.power_gains
    powers = np.empty(cfg.K)
    full = order[:k_star]
    inverted = order[k_star:]
    powers[full] = budgets[full]
    powers[inverted] = eta_star / power_gains[inverted]
    objective = mse_single_state(cfg, ch, powers, eta_star).total_unscaled
    return StaticSolution(
        order=tuple(int(i) for i in order),
        k_star=int(k_star),
        eta_star=float(eta_star),
        powers=powers,
        objective=objective,
        diagnostics=diagnostics,
    )


def _check_threshold_structure(k_star: int, eta_star: float, diag: StaticDiagnostics) -> None:
    """Verify q_{k*} <= eta* <= q_{k*+1} and q_k <= eta_tilde_{k-1} iff k <= k*."""
    q = diag.quality
    K = len(q)

    def below(a: float, b: float) -> bool:
        return a <= b * (1 + CONSISTENCY_RTOL)

    if not below(q[k_star - 1], eta_star):
        raise InternalConsistencyError(
            f"eta* = {eta_star!r} is below the quality of the last full-power device {q[k_star - 1]!r}"
        )
    if k_star < K and not below(eta_star, q[k_star]):
        raise InternalConsistencyError(
            f"eta* = {eta_star!r} exceeds the quality of the first inverting device {q[k_star]!r}"
        )
    for k in range(2, K + 1):
        previous = diag.eta_tilde[k - 2]
        if k <= k_star and not below(q[k - 1], previous):
            raise InternalConsistencyError(f"rank {k} should not exceed eta_tilde_{k - 1}")
        if k > k_star and not below(previous, q[k - 1]):
            raise InternalConsistencyError(f"rank {k} should not fall below eta_tilde_{k - 1}")


def solve_static(cfg: SystemConfig, ch: ChannelVector) -> StaticSolution:
    """Optimal static policy via the threshold index k* = argmin_k eta_tilde_k.

    Ties in eta_tilde resolve to the smallest k.

    Args:
        cfg: System configuration
        ch: Channel state with every |h_k| > 0

    Returns:
        StaticSolution in original device order

    Raises:
        DegenerateChannelError: If some |h_k| = 0
        InternalConsistencyError: If the threshold structure check fails

    Examples:
        >>> cfg = SystemConfig(K=2, noise_var=2.0, power_budgets=(1.0, 1.0))
        >>> solve_static(cfg, ChannelVector.from_power_gains([1.0, 4.0])).k_star
        2
    """
    order, diagnostics = _prepare(cfg, ch)
    k_star = int(np.argmin(diagnostics.eta_tilde)) + 1
    eta_star = float(diagnostics.eta_tilde[k_star - 1])
    _check_threshold_structure(k_star, eta_star, diagnostics)
    logger.debug(f"static solution: k*={k_star}, eta*={eta_star:.6g}")
    return _assemble(cfg, ch, order, k_star, eta_star, diagnostics)


def solve_static_by_enumeration(cfg: SystemConfig, ch: ChannelVector) -> StaticSolution:
    """Optimal static policy by minimizing F_k over each quality interval.

    For every k the stationary point is clamped to [q_k, q_{k+1}] (q_{K+1} = inf)
    and the k with the smallest F_k value wins.
    """
    order, diagnostics = _prepare(cfg, ch)
    q = diagnostics.quality
    upper = np.append(q[1:], np.inf)
    clamped = np.minimum(upper, np.maximum(diagnostics.eta_tilde, q))
    values = np.array(
        [float(static_subproblem_objective(q, cfg.noise_var, k, clamped[k - 1])) for k in range(1, cfg.K + 1)]
    )
    k_star = int(np.argmin(values)) + 1
    return _assemble(cfg, ch, order, k_star, float(clamped[k_star - 1]), diagnostics)


def static_grid_objective(
    cfg: SystemConfig, ch: ChannelVector, num_points: int = 10**6, chunk_size: int = 50_000
) -> tuple[float, float]:
    """Brute-force minimum of the static objective over a log-spaced eta grid.

    For a given eta every device uses min(P_k, eta/|h_k|^2); the grid spans
    [1e-4 * q_(1), 1e4 * eta_tilde_K].

    Returns:
        Tuple of (minimum objective, minimizing eta)
    """
    if num_points < 2:
        raise InvalidArgumentError(f"num_points must be at least 2, got {num_points}")
    _, diagnostics = _prepare(cfg, ch)
    q = diagnostics.quality
    grid = np.geomspace(1e-4 * q[0], 1e4 * diagnostics.eta_tilde[-1], num_points)
    root = np.sqrt(q)[np.newaxis, :]

    best_value, best_eta = np.inf, float(grid[0])
    for start in range(0, num_points, chunk_size):
        eta = grid[start : start + chunk_size]
        ratio = np.minimum(root / np.sqrt(eta)[:, np.newaxis], 1.0)
        values = np.sum((ratio - 1.0) ** 2, axis=1) + cfg.noise_var / eta
        idx = int(np.argmin(values))
        if values[idx] < best_value:
            best_value, best_eta = float(values[idx]), float(eta[idx])
    return best_value, best_eta


def asymptotic_static(
    cfg: SystemConfig, ch: ChannelVector, regime: Literal["high_snr", "low_snr"]
) -> StaticSolution:
    """Limiting policies of the static problem.

    high_snr: channel inversion for every device at eta = q_(1).
    low_snr: full power for every device at eta = eta_tilde_K.
    """
    order, diagnostics = _prepare(cfg, ch)
    if regime == "high_snr":
        return _assemble(cfg, ch, order, 1, float(diagnostics.quality[0]), diagnostics)
    if regime == "low_snr":
        return _assemble(cfg, ch, order, cfg.K, float(diagnostics.eta_tilde[-1]), diagnostics)
    raise InvalidArgumentError(f"regime must be 'high_snr' or 'low_snr', got {regime!r}")
