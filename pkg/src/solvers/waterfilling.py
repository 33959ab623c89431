"""Closed-form policy when only one device is power limited.

The limited device follows a channel-inversion water-filling rule: it is
silent below the cutoff magnitude sqrt(mu sigma^2), its power rises to the
peak 1/(4 mu) at twice the cutoff, and decays beyond. Every other device
inverts its channel to the denoising level of the state.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from src.domain.ensemble import FadingEnsemble
from src.domain.errors import DegenerateChannelError, InternalConsistencyError, InvalidArgumentError
from src.domain.system import SILENT, PowerPolicy, SystemConfig

logger = logging.getLogger("aircomp.waterfilling")

MU_LOWER = 1e-12
BUDGET_RTOL = 1e-10


@dataclass(frozen=True)
class WaterfillingSolution:
    """Optimal policy with a single power-limited device.

    Attributes:
        mu1: Optimal dual price of the limited device
        policy: Per-state powers and denoising factors
        threshold: Cutoff channel magnitude below which the device is silent
        peak_gain: Channel magnitude of maximal transmit power
        limited_device: Index of the power-limited device
        realized_powers: E[p_k] for every device
    """

    mu1: float
    policy: PowerPolicy
    threshold: float
    peak_gain: float
    limited_device: int
    realized_powers: np.ndarray


def p1_closed_form(h1_mag, mu1: float, sigma_sq: float):
    """Water-filling power (sigma / (sqrt(mu) |h|^2)) * (|h| - sqrt(mu sigma^2))^+.

    Vectorized over h1_mag; zero at |h| = 0.
    """
    if not mu1 > 0:
        raise InvalidArgumentError(f"mu1 must be positive, got {mu1}")
    h = np.asarray(h1_mag, dtype=float)
    cutoff = np.sqrt(mu1 * sigma_sq)
    excess = np.maximum(h - cutoff, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(h > 0, np.sqrt(sigma_sq) / (np.sqrt(mu1) * np.where(h > 0, h, 1.0) ** 2) * excess, 0.0)
    return float(power) if power.ndim == 0 else power


def _budget_price(magnitudes: np.ndarray, weights: np.ndarray, sigma_sq: float, budget: float) -> float:
    """mu1 with E[p1(mu1)] = budget; E[p1] is strictly decreasing in mu1."""

    def excess(mu):
        return float(weights @ p1_closed_form(magnitudes, mu, sigma_sq)) - budget

    low = MU_LOWER
    while excess(low) <= 0:
        low *= 1e-3
        if low < 1e-300:
            raise InternalConsistencyError("budget unreachable even at vanishing price")
    high = 1.0
    while excess(high) >= 0:
        high *= 2.0
    mu = brentq(excess, low, high, xtol=np.finfo(float).tiny, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(excess(mu)) > BUDGET_RTOL * budget:
        logger.warning(f"budget equation residual {excess(mu):.3e} above tolerance")
    return float(mu)


def solve_p3(cfg: SystemConfig, ens: FadingEnsemble, limited_device: int = 0) -> WaterfillingSolution:
    """Optimal policy when only limited_device has an average power budget.

    The other devices are unconstrained. States where the limited device is
    silent are silent altogether.

    Raises:
        InvalidArgumentError: If limited_device is out of range or its channel
            is zero in every state
        DegenerateChannelError: If another device has zero gain on a non-silent state
    """
    if not 0 <= limited_device < cfg.K:
        raise InvalidArgumentError(f"limited_device must be in 0..{cfg.K - 1}, got {limited_device}")
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"ensemble has {ens.K} devices, config has K={cfg.K}")
    magnitudes = np.abs(ens.gains[:, limited_device])
    if not np.any(magnitudes > 0):
        raise InvalidArgumentError(f"device {limited_device} has zero gain in every state")

    sigma_sq = cfg.noise_var
    budget = cfg.power_budgets[limited_device]
    mu1 = _budget_price(magnitudes, ens.weights, sigma_sq, budget)
    p1 = p1_closed_form(magnitudes, mu1, sigma_sq)

    received = p1 * magnitudes**2
    active = p1 > 0
    eta = np.full(ens.num_states, SILENT)
    eta[active] = ((sigma_sq + received[active]) / np.sqrt(received[active])) ** 2

    power_gains = ens.power_gains
    others = [k for k in range(cfg.K) if k != limited_device]
    if others and np.any(power_gains[np.ix_(active, others)] == 0):
        raise DegenerateChannelError("an unconstrained device has zero gain on a transmitting state")
    powers = np.zeros((ens.num_states, cfg.K))
    powers[:, limited_device] = p1
    for k in others:
        powers[active, k] = eta[active] / power_gains[active, k]

    policy = PowerPolicy(powers, eta)
    threshold = float(np.sqrt(mu1 * sigma_sq))
    logger.info(f"water-filling price mu1={mu1:.8g}, cutoff |h|={threshold:.6g}")
    return WaterfillingSolution(
        mu1=mu1,
        policy=policy,
        threshold=threshold,
        peak_gain=2.0 * threshold,
        limited_device=limited_device,
        realized_powers=policy.expected_powers(ens.weights),
    )
