"""Closed-form computation MSE of a power policy.

Per state with denoising factor eta the unscaled error is

    sum_k (sqrt(p_k)|h_k| / sqrt(eta) - 1)^2 + sigma^2 / eta

and a silent state (eta = inf, all powers zero) contributes exactly K.
"""

from typing import Sequence

import numpy as np

from src.domain.ensemble import FadingEnsemble
from src.domain.errors import InvalidArgumentError
from src.domain.system import ChannelVector, MseReport, PowerPolicy, SystemConfig


def state_terms(
    power_gains: np.ndarray, powers: np.ndarray, denoise: np.ndarray, noise_var: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-state misalignment and noise terms.

    Args:
        power_gains: |h_k|^2, shape (N, K)
        powers: p_k, shape (N, K)
        denoise: eta, shape (N,), inf marks a silent state
        noise_var: sigma^2

    Returns:
        Tuple of (misalignment, noise_term), each of shape (N,)
    """
    K = power_gains.shape[1]
    silent = np.isinf(denoise)
    misalignment = np.full(denoise.shape, float(K))
    noise = np.zeros(denoise.shape)
    active = ~silent
    if np.any(active):
        eta = denoise[active]
        aligned = np.sqrt(powers[active] * power_gains[active]) / np.sqrt(eta)[:, np.newaxis]
        misalignment[active] = np.sum((aligned - 1.0) ** 2, axis=1)
        noise[active] = noise_var / eta
    return misalignment, noise


def _check_powers(p: np.ndarray, K: int) -> None:
    if p.shape != (K,):
        raise InvalidArgumentError(f"expected {K} powers, got shape {p.shape}")
    if np.any(p < 0):
        raise InvalidArgumentError(f"powers must be nonnegative, got {p.tolist()}")


def mse_single_state(
    cfg: SystemConfig, ch: ChannelVector, p: Sequence[float], eta: float
) -> MseReport:
    """MSE of one channel state under powers p and denoising factor eta.

    Raises:
        InvalidArgumentError: On dimension mismatch, negative power, eta <= 0,
            or eta = inf with a nonzero power
    """
    p = np.asarray(p, dtype=float)
    _check_powers(p, cfg.K)
    if ch.K != cfg.K:
        raise InvalidArgumentError(f"channel has {ch.K} devices, config has K={cfg.K}")
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    if np.isinf(eta) and np.any(p > 0):
        raise InvalidArgumentError("eta = inf requires all powers to be zero")

    misalignment, noise = state_terms(
        ch.power_gains[np.newaxis, :], p[np.newaxis, :], np.array([float(eta)]), cfg.noise_var
    )
    return MseReport.from_terms(misalignment[0], noise[0], cfg.K)


def mse_ensemble(cfg: SystemConfig, ens: FadingEnsemble, policy: PowerPolicy) -> MseReport:
    """Ensemble-average MSE: the weighted mean of the per-state errors."""
    if policy.num_states != ens.num_states:
        raise InvalidArgumentError(
            f"policy covers {policy.num_states} states, ensemble has {ens.num_states}"
        )
    if policy.K != cfg.K or ens.K != cfg.K:
        raise InvalidArgumentError(
            f"device count mismatch: config K={cfg.K}, ensemble K={ens.K}, policy K={policy.K}"
        )
    misalignment, noise = state_terms(ens.power_gains, policy.powers, policy.denoise, cfg.noise_var)
    return MseReport.from_terms(
        float(ens.weights @ misalignment), float(ens.weights @ noise), cfg.K
    )


def optimal_denoise_for_powers(
    power_gains: np.ndarray, powers: np.ndarray, noise_var: float
) -> np.ndarray:
    """Per-state denoising factor minimizing the MSE for fixed powers.

    With a_k = sqrt(p_k)|h_k| the optimum is ((sum a_k^2 + sigma^2) / sum a_k)^2;
    states where every a_k is zero become silent.
    """
    power_gains = np.atleast_2d(power_gains)
    powers = np.atleast_2d(powers)
    amplitude = np.sqrt(powers * power_gains)
    total = amplitude.sum(axis=1)
    energy = (amplitude**2).sum(axis=1)
    eta = np.full(total.shape, np.inf)
    active = total > 0
    eta[active] = ((energy[active] + noise_var) / total[active]) ** 2
    return eta
