"""Truncated channel inversion with one fading-independent denoising factor.

Device k inverts its channel (p = eta/|h_k|^2) whenever |h_k|^2 >= xi_k and
stays silent otherwise. Inverting states align exactly, so the ensemble MSE is

    K - sum_k P(|h_k|^2 >= xi_k) + sigma^2 / eta.

For a given eta each xi_k is the smallest threshold whose inversion cost fits
the budget. On a finite ensemble the objective is piecewise in eta and its
minima sit on the points where an inversion set just fits its budget, so
those points are scanned together with a log grid.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.domain.ensemble import FadingEnsemble
from src.domain.errors import InvalidArgumentError
from src.domain.mse import mse_ensemble
from src.domain.system import MseReport, PowerPolicy, SystemConfig

logger = logging.getLogger("aircomp.lowcomplexity")

BUDGET_SLACK = 1e-12
DEFAULT_GRID_POINTS = 200


@dataclass(frozen=True)
class InversionProfile:
    """Cumulative inversion cost of one device, best states first.

    Entry m describes inverting the m+1 strongest distinct gain levels.

    Attributes:
        gain_levels: Distinct positive power gains, descending
        unit_cost: Sum of w/|h|^2 over the inverted states (cost per unit eta)
        probability: Sum of w over the inverted states
        has_dead_states: Whether some state has zero gain
    """

    gain_levels: np.ndarray
    unit_cost: np.ndarray
    probability: np.ndarray
    has_dead_states: bool

    @classmethod
    def build(cls, power_gains: np.ndarray, weights: np.ndarray) -> "InversionProfile":
        live = power_gains > 0
        gains = power_gains[live]
        w = weights[live]
        order = np.argsort(-gains, kind="stable")
        gains, w = gains[order], w[order]
        cost = np.cumsum(w / gains)
        probability = np.cumsum(w)
        # a threshold cannot split states of equal gain
        group_end = np.append(gains[1:] != gains[:-1], True) if gains.size else np.array([], dtype=bool)
        return cls(
            gain_levels=gains[group_end],
            unit_cost=cost[group_end],
            probability=probability[group_end],
            has_dead_states=bool(np.any(~live)),
        )

    def levels_within(self, eta, budget: float) -> np.ndarray:
        """Number of gain levels invertible within budget, vectorized over eta."""
        eta = np.asarray(eta, dtype=float)
        return np.searchsorted(self.unit_cost, budget * (1.0 + BUDGET_SLACK) / eta, side="right")

    def threshold(self, levels: int) -> float:
        if levels == 0:
            if self.gain_levels.size == 0:
                return float(np.inf)
            return float(np.nextafter(self.gain_levels[0], np.inf))
        if levels == self.gain_levels.size and not self.has_dead_states:
            return 0.0
        return float(self.gain_levels[levels - 1])

    def probability_of(self, levels) -> np.ndarray:
        levels = np.asarray(levels)
        padded = np.concatenate(([0.0], self.probability))
        return padded[levels]

    def breakpoints(self, budget: float) -> np.ndarray:
        return budget / self.unit_cost


@dataclass(frozen=True)
class TruncationPolicy:
    """Low-complexity policy.

    Attributes:
        eta: Uniform denoising factor
        xi: Truncation thresholds on |h_k|^2
        inversion_prob: Probability that device k inverts
        objective: K - sum inversion_prob + sigma^2/eta
    """

    eta: float
    xi: np.ndarray
    inversion_prob: np.ndarray
    objective: float

    def to_power_policy(self, ens: FadingEnsemble) -> PowerPolicy:
        power_gains = ens.power_gains
        inverting = (power_gains >= self.xi[np.newaxis, :]) & (power_gains > 0)
        powers = np.zeros_like(power_gains)
        powers[inverting] = self.eta / power_gains[inverting]
        return PowerPolicy(powers, np.full(ens.num_states, self.eta))

    def report(self, cfg: SystemConfig, ens: FadingEnsemble) -> MseReport:
        return mse_ensemble(cfg, ens, self.to_power_policy(ens))


def xi_for_eta(ens: FadingEnsemble, k: int, eta: float, budget: float) -> float:
    """Truncation threshold of device k for a given eta.

    Picks the largest inversion set, strongest states first, whose cost
    E[I_k eta/|h_k|^2] does not exceed the budget. Returns a value above the
    largest gain if not even the best state fits.
    """
    if not 0 <= k < ens.K:
        raise InvalidArgumentError(f"device index must be in 0..{ens.K - 1}, got {k}")
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    if not budget > 0:
        raise InvalidArgumentError(f"budget must be positive, got {budget}")
    profile = InversionProfile.build(ens.power_gains[:, k], ens.weights)
    return profile.threshold(int(profile.levels_within(eta, budget)))


def default_eta_grid(cfg: SystemConfig, ens: FadingEnsemble, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Log grid over [1e-2 sigma^2, 1e4 max_k E[P_k |h_k|^2]]."""
    top = float(np.max(cfg.budgets * ens.expectation(ens.power_gains)))
    return np.geomspace(1e-2 * cfg.noise_var, 1e4 * top, points)


def solve_lowcomplexity(
    cfg: SystemConfig,
    ens: FadingEnsemble,
    eta_grid: Optional[Sequence[float]] = None,
    include_breakpoints: bool = True,
) -> TruncationPolicy:
    """Best uniform eta and truncation thresholds.

    Args:
        cfg: System configuration
        ens: Fading ensemble
        eta_grid: Candidate denoising factors (default: 200-point log grid)
        include_breakpoints: Also scan the exact budget-fit points

    Returns:
        TruncationPolicy minimizing K - sum_k E[I_k] + sigma^2/eta
    """
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"ensemble has {ens.K} devices, config has K={cfg.K}")
    grid = default_eta_grid(cfg, ens) if eta_grid is None else np.asarray(eta_grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgumentError("eta_grid must not be empty")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise InvalidArgumentError("eta_grid values must be positive and finite")

    budgets = cfg.budgets
    profiles = [InversionProfile.build(ens.power_gains[:, k], ens.weights) for k in range(cfg.K)]
    candidates = [grid]
    if include_breakpoints:
        candidates += [p.breakpoints(b) for p, b in zip(profiles, budgets)]
    candidates = np.unique(np.concatenate(candidates))

    inverted = np.zeros(candidates.size)
    for profile, budget in zip(profiles, budgets):
        inverted += profile.probability_of(profile.levels_within(candidates, budget))
    objective = cfg.K - inverted + cfg.noise_var / candidates
    best = int(np.argmin(objective))
    eta = float(candidates[best])

    levels = [int(p.levels_within(eta, b)) for p, b in zip(profiles, budgets)]
    xi = np.array([p.threshold(m) for p, m in zip(profiles, levels)])
    probability = np.array([float(p.probability_of(m)) for p, m in zip(profiles, levels)])
    logger.debug(f"low-complexity eta={eta:.6g} over {candidates.size} candidates")
    return TruncationPolicy(
        eta=eta,
        xi=xi,
        inversion_prob=probability,
        objective=float(cfg.K - probability.sum() + cfg.noise_var / eta),
    )
