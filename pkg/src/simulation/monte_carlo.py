"""Signal-level Monte Carlo check of the closed-form MSE.

Simulates the actual over-the-air transmission of one channel state:
every device sends a unit-variance symbol scaled by sqrt(p_k)|h_k|, the
receiver adds Gaussian noise, divides by K sqrt(eta) and compares the result
with the true average. Sampling is progressive: start with min_draws, then
add check_interval draws until the standard error reaches the target
precision or max_draws is hit.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from src.analysis.statistics import progressive_sampling_stopping_criteria, standard_error
from src.domain.errors import InvalidArgumentError, UnsupportedOperationError
from src.domain.system import ChannelVector, SignalSample, SystemConfig

MIN_ORACLE_DRAWS = 100


@dataclass
class OracleResults:
    """Results of a signal-level simulation.

    Attributes:
        empirical_mse: Sample mean of (f_hat - f)^2
        std_error: Standard error of empirical_mse
        total_draws: Number of simulated transmissions
    """

    empirical_mse: float
    std_error: float
    total_draws: int


def _validate(cfg: SystemConfig, ch: ChannelVector, p: Sequence[float], eta: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (cfg.K,) or ch.K != cfg.K:
        raise InvalidArgumentError(f"expected {cfg.K} powers and channel gains")
    if np.any(p < 0):
        raise InvalidArgumentError(f"powers must be nonnegative, got {p.tolist()}")
    if np.isinf(eta):
        raise UnsupportedOperationError("the signal oracle needs a finite denoising factor")
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    return p


def _squared_errors(rng: np.random.Generator, amplitude: np.ndarray, eta: float, noise_var: float, n: int) -> np.ndarray:
    K = amplitude.size
    s = rng.standard_normal((n, K))
    w = rng.standard_normal(n) * np.sqrt(noise_var)
    y = s @ amplitude + w
    f_hat = y / (K * np.sqrt(eta))
    return (f_hat - s.mean(axis=1)) ** 2


def draw_signal_sample(
    cfg: SystemConfig, ch: ChannelVector, p: Sequence[float], eta: float, rng: np.random.Generator
) -> SignalSample:
    """Simulate one transmission and the receiver's estimate."""
    p = _validate(cfg, ch, p, eta)
    s = rng.standard_normal(cfg.K)
    w = float(rng.standard_normal() * np.sqrt(cfg.noise_var))
    y = float(np.sqrt(p) * ch.magnitudes @ s + w)
    return SignalSample(s=s, w=w, y=y, f_hat=y / (cfg.K * np.sqrt(eta)), f=float(s.mean()))


class SignalMonteCarlo:
    """Signal-level MSE estimator with progressive sampling.

    1. Simulate min_draws transmissions
    2. Check the relative standard error every check_interval draws
    3. Stop when it is <= target_precision OR max_draws reached
    """

    def __init__(
        self,
        min_draws: int = 10_000,
        max_draws: int = 1_000_000,
        target_precision: float = 0.01,
        check_interval: int = 10_000,
    ):
        """Initialize the estimator.

        Raises:
            InvalidArgumentError: If parameters are invalid
        """
        if min_draws < MIN_ORACLE_DRAWS:
            raise InvalidArgumentError(f"min_draws must be at least {MIN_ORACLE_DRAWS}, got {min_draws}")
        if max_draws < min_draws:
            raise InvalidArgumentError(f"min_draws ({min_draws}) cannot exceed max_draws ({max_draws})")
        if not target_precision > 0:
            raise InvalidArgumentError(f"target_precision must be positive, got {target_precision}")
        if check_interval <= 0:
            raise InvalidArgumentError(f"check_interval must be positive, got {check_interval}")

        self.min_draws = min_draws
        self.max_draws = max_draws
        self.target_precision = target_precision
        self.check_interval = check_interval

    def run(
        self,
        cfg: SystemConfig,
        ch: ChannelVector,
        p: Sequence[float],
        eta: float,
        seed: Optional[int] = None,
        on_progress: Optional[Callable[[int, int], None]] = None,
    ) -> OracleResults:
        """Estimate the scaled MSE of (p, eta) on channel ch.

        Deterministic given seed.
        """
        p = _validate(cfg, ch, p, eta)
        rng = np.random.default_rng(seed)
        amplitude = np.sqrt(p) * ch.magnitudes

        chunks = [_squared_errors(rng, amplitude, eta, cfg.noise_var, self.min_draws)]
        total = self.min_draws
        while total < self.max_draws:
            errors = np.concatenate(chunks)
            if progressive_sampling_stopping_criteria(
                float(errors.mean()), standard_error(errors), self.target_precision
            ):
                break
            n = min(self.check_interval, self.max_draws - total)
            chunks.append(_squared_errors(rng, amplitude, eta, cfg.noise_var, n))
            total += n
            if on_progress is not None:
                on_progress(total, self.max_draws)

        errors = np.concatenate(chunks)
        return OracleResults(
            empirical_mse=float(errors.mean()),
            std_error=standard_error(errors),
            total_draws=int(errors.size),
        )


def mse_signal_oracle(
    cfg: SystemConfig,
    ch: ChannelVector,
    p: Sequence[float],
    eta: float,
    num_draws: int,
    seed: Optional[int] = None,
) -> tuple[float, float]:
    """Fixed-size signal-level estimate of the scaled MSE.

    Returns:
        Tuple of (empirical_mse, std_error)

    Raises:
        UnsupportedOperationError: If eta is infinite
        InvalidArgumentError: If num_draws < 100 or inputs are invalid
    """
    if num_draws < MIN_ORACLE_DRAWS:
        raise InvalidArgumentError(f"num_draws must be at least {MIN_ORACLE_DRAWS}, got {num_draws}")
    simulator = SignalMonteCarlo(min_draws=num_draws, max_draws=num_draws, check_interval=num_draws)
    result = simulator.run(cfg, ch, p, eta, seed=seed)
    return result.empirical_mse, result.std_error
