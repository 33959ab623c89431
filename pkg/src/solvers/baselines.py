"""Reference policies the optimal solvers are compared against."""

from typing import Optional, Sequence, Union

import numpy as np

from src.domain.ensemble import FadingEnsemble, static_ensemble
from src.domain.errors import InvalidArgumentError
from src.domain.mse import mse_ensemble
from src.domain.system import SILENT, ChannelVector, MseReport, PowerPolicy, SystemConfig
from src.solvers.static import quality_order

CUTOFF_QUANTILES = (0.01, 0.02, 0.05, 0.10, 0.20, 0.30)


def full_power_static(cfg: SystemConfig, ch: ChannelVector) -> PowerPolicy:
    """Every device at full power with the matching optimal denoising factor."""
    _, quality_sorted = quality_order(cfg, ch)
    if not np.any(quality_sorted > 0):
        return PowerPolicy.single(np.zeros(cfg.K), SILENT)
    # last stationary point only; leading ranks may have zero quality
    eta = float(((cfg.noise_var + quality_sorted.sum()) / np.sqrt(quality_sorted).sum()) ** 2)
    return PowerPolicy.single(cfg.budgets, eta)


def uniform_power_fading(cfg: SystemConfig, ens: FadingEnsemble) -> PowerPolicy:
    """Constant power P_k in every state, eta = min_k E[P_k |h_k|^2] everywhere."""
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"ensemble has {ens.K} devices, config has K={cfg.K}")
    eta = float(np.min(cfg.budgets * ens.expectation(ens.power_gains)))
    if not eta > 0:
        raise InvalidArgumentError("some device has zero average channel gain")
    powers = np.tile(cfg.budgets, (ens.num_states, 1))
    return PowerPolicy(powers, np.full(ens.num_states, eta))


def traditional_inversion(
    cfg: SystemConfig, ens_or_ch: Union[FadingEnsemble, ChannelVector], xi: float
) -> PowerPolicy:
    """Truncated channel inversion under an instantaneous cap P_k in every state.

    Devices with |h_k|^2 below xi are cut off. The survivors invert to
    eta = min over survivors of P_k |h_k|^2; a state with no survivor is silent.
    """
    if not xi >= 0:
        raise InvalidArgumentError(f"cutoff must be nonnegative, got {xi}")
    ens = static_ensemble(ens_or_ch) if isinstance(ens_or_ch, ChannelVector) else ens_or_ch
    if ens.K != cfg.K:
        raise InvalidArgumentError(f"channel has {ens.K} devices, config has K={cfg.K}")

    power_gains = ens.power_gains
    survivors = (power_gains >= xi) & (power_gains > 0)
    quality = np.where(survivors, cfg.budgets * power_gains, np.inf)
    eta = quality.min(axis=1)
    silent = ~survivors.any(axis=1)
    eta[silent] = SILENT
    powers = np.zeros_like(power_gains)
    rows, cols = np.nonzero(survivors)
    powers[rows, cols] = eta[rows] / power_gains[rows, cols]
    return PowerPolicy(powers, eta)


def best_traditional_cutoff(
    cfg: SystemConfig, ens: FadingEnsemble, grid: Optional[Sequence[float]] = None
) -> tuple[float, PowerPolicy, MseReport]:
    """Cutoff from a small grid minimizing the ensemble MSE of traditional inversion.

    The default grid is zero plus low quantiles of all channel power gains.
    """
    if grid is None:
        grid = np.concatenate(([0.0], np.quantile(ens.power_gains, CUTOFF_QUANTILES)))
    best = None
    for xi in sorted(set(float(x) for x in grid)):
        policy = traditional_inversion(cfg, ens, xi)
        report = mse_ensemble(cfg, ens, policy)
        if best is None or report.total_unscaled < best[2].total_unscaled:
            best = (xi, policy, report)
    if best is None:
        raise InvalidArgumentError("cutoff grid must not be empty")
    return best
