"""Core data types of the AirComp system model.

- SystemConfig: device count, receiver noise variance and average power budgets
- ChannelVector: one fading state (complex channel coefficients)
- PowerPolicy: per-state transmit powers and denoising factors
- MseReport: decomposed computation error
- SignalSample: one signal-level draw used by the Monte Carlo oracle

Array-valued types are frozen dataclasses holding read-only numpy arrays;
configuration types are frozen pydantic models.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, computed_field, model_validator

from src.domain.errors import InvalidArgumentError

# Denoising factor of a silent state: every device is off and the receiver
# discards the signal.
SILENT = math.inf


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


class SystemConfig(BaseModel):
    """Static parameters of an AirComp system.

    Attributes:
        K: Number of transmitting devices
        noise_var: Receiver noise variance (sigma^2)
        power_budgets: Average power budget of each device
    """

    model_config = {"frozen": True}

    K: int
    noise_var: float
    power_budgets: tuple[float, ...]

    @model_validator(mode="after")
    def _check(self) -> "SystemConfig":
        if self.K < 1:
            raise InvalidArgumentError(f"K must be positive, got {self.K}")
        if not (self.noise_var > 0 and math.isfinite(self.noise_var)):
            raise InvalidArgumentError(f"noise_var must be positive, got {self.noise_var}")
        if len(self.power_budgets) != self.K:
            raise InvalidArgumentError(
                f"power_budgets has {len(self.power_budgets)} entries, expected K={self.K}"
            )
        for k, budget in enumerate(self.power_budgets):
            if not (budget > 0 and math.isfinite(budget)):
                raise InvalidArgumentError(f"power budget of device {k} must be positive, got {budget}")
        return self

    @computed_field
    @property
    def snr(self) -> tuple[float, ...]:
        """Expected receive SNR rho_k = P_k / sigma^2 of each device."""
        return tuple(b / self.noise_var for b in self.power_budgets)

    @property
    def budgets(self) -> np.ndarray:
        """Power budgets as a float array."""
        return np.asarray(self.power_budgets, dtype=float)

    @classmethod
    def uniform(cls, K: int, noise_var: float, budget: float = 1.0) -> "SystemConfig":
        """System where every device has the same budget."""
        return cls(K=K, noise_var=noise_var, power_budgets=(budget,) * K)


@dataclass(frozen=True)
class ChannelVector:
    """Channel coefficients h_1..h_K of one fading state.

    Solvers only use the power gains |h_k|^2; the phase is kept for the
    signal-level oracle.
    """

    gains: np.ndarray

    def __post_init__(self):
        gains = _readonly(self.gains, complex)
        if gains.ndim != 1 or gains.size == 0:
            raise InvalidArgumentError(f"gains must be a non-empty vector, got shape {gains.shape}")
        if not np.all(np.isfinite(gains)):
            raise InvalidArgumentError("gains must be finite")
        object.__setattr__(self, "gains", gains)

    @classmethod
    def from_power_gains(cls, power_gains: Sequence[float]) -> "ChannelVector":
        """Build a real-valued channel from power gains |h_k|^2."""
        power_gains = np.asarray(power_gains, dtype=float)
        if np.any(power_gains < 0):
            raise InvalidArgumentError("power gains must be nonnegative")
        return cls(np.sqrt(power_gains).astype(complex))

    @property
    def K(self) -> int:
        return int(self.gains.size)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.gains)

    @property
    def power_gains(self) -> np.ndarray:
        return np.abs(self.gains) ** 2


@dataclass(frozen=True)
class PowerPolicy:
    """Per-state transmit powers p_k(v) and denoising factors eta(v).

    Attributes:
        powers: Array of shape (N, K), nonnegative
        denoise: Array of shape (N,), each entry positive or SILENT
    """

    powers: np.ndarray
    denoise: np.ndarray

    def __post_init__(self):
        powers = _readonly(np.atleast_2d(np.asarray(self.powers, dtype=float)), float)
        denoise = _readonly(np.atleast_1d(np.asarray(self.denoise, dtype=float)), float)
        if powers.ndim != 2:
            raise InvalidArgumentError(f"powers must be 2-D (states x devices), got shape {powers.shape}")
        if denoise.shape != (powers.shape[0],):
            raise InvalidArgumentError(
                f"denoise has shape {denoise.shape}, expected ({powers.shape[0]},)"
            )
        if np.any(np.isnan(powers)) or np.any(np.isinf(powers)):
            raise InvalidArgumentError("powers must be finite")
        if np.any(powers < 0):
            raise InvalidArgumentError("powers must be nonnegative")
        if np.any(np.isnan(denoise)) or np.any(denoise <= 0):
            raise InvalidArgumentError("denoising factors must be positive or SILENT")
        silent = np.isinf(denoise)
        if np.any(powers[silent] > 0):
            raise InvalidArgumentError("a silent state (eta = inf) must have all powers zero")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "denoise", denoise)

    @classmethod
    def single(cls, powers: Sequence[float], eta: float) -> "PowerPolicy":
        """Policy for a single (static) channel state."""
        return cls(np.asarray(powers, dtype=float)[np.newaxis, :], np.array([eta], dtype=float))

    @property
    def num_states(self) -> int:
        return int(self.powers.shape[0])

    @property
    def K(self) -> int:
        return int(self.powers.shape[1])

    @property
    def silent_states(self) -> np.ndarray:
        return np.isinf(self.denoise)

    def expected_powers(self, weights: np.ndarray) -> np.ndarray:
        """E_v[p_k(v)] under the given state weights."""
        return np.asarray(weights, dtype=float) @ self.powers


@dataclass(frozen=True)
class MseReport:
    """Decomposed MSE of a policy.

    total_unscaled is the optimized objective; total_scaled carries the 1/K^2
    factor of the averaged function.
    """

    misalignment: float
    noise_term: float
    total_unscaled: float
    total_scaled: float

    def __post_init__(self):
        for name in ("misalignment", "noise_term", "total_unscaled", "total_scaled"):
            value = getattr(self, name)
            if not value >= 0:
                raise InvalidArgumentError(f"{name} must be nonnegative, got {value}")

    @classmethod
    def from_terms(cls, misalignment: float, noise_term: float, K: int) -> "MseReport":
        total = misalignment + noise_term
        return cls(
            misalignment=float(misalignment),
            noise_term=float(noise_term),
            total_unscaled=float(total),
            total_scaled=float(total / K**2),
        )


@dataclass(frozen=True)
class SignalSample:
    """One draw of source symbols, noise and the resulting estimate."""

    s: np.ndarray
    w: float
    y: float
    f_hat: float
    f: float
