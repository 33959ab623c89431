"""Random problem instances for property checks and oracle comparisons."""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from src.domain.system import ChannelVector, SystemConfig

BUDGET_RANGE = (0.1, 10.0)
GAIN_RANGE = (0.1, 10.0)
NOISE_RANGE = (0.1, 10.0)
MAX_DEVICES = 6


@dataclass(frozen=True)
class StaticInstance:
    cfg: SystemConfig
    channel: ChannelVector


def _log_uniform(rng: np.random.Generator, bounds: tuple[float, float], size=None):
    low, high = np.log(bounds[0]), np.log(bounds[1])
    return np.exp(rng.uniform(low, high, size))


def random_static_instance(
    rng: np.random.Generator,
    max_devices: int = MAX_DEVICES,
    noise_var: Optional[float] = None,
) -> StaticInstance:
    """One instance with K uniform in 1..max_devices and log-uniform budgets,
    channel power gains and noise variance (unless noise_var is given)."""
    K = int(rng.integers(1, max_devices + 1))
    budgets = _log_uniform(rng, BUDGET_RANGE, K)
    gains = _log_uniform(rng, GAIN_RANGE, K)
    sigma_sq = float(_log_uniform(rng, NOISE_RANGE)) if noise_var is None else noise_var
    cfg = SystemConfig(K=K, noise_var=sigma_sq, power_budgets=tuple(float(b) for b in budgets))
    return StaticInstance(cfg=cfg, channel=ChannelVector.from_power_gains(gains))


def static_instances(
    count: int,
    seed: int,
    max_devices: int = MAX_DEVICES,
    noise_var: Optional[float] = None,
) -> Iterator[StaticInstance]:
    """Deterministic stream of count random static instances."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_static_instance(rng, max_devices, noise_var)
