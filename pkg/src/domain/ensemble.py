"""Finite fading ensembles standing in for the fading distribution.

Every expectation over fading states is the weighted sum over a
FadingEnsemble. Ensembles are built deterministically from a seed.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.domain.errors import InvalidArgumentError
from src.domain.system import ChannelVector

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FadingEnsemble:
    """N channel states with positive probabilities summing to one.

    Attributes:
        gains: Complex channel coefficients, shape (N, K)
        weights: State probabilities, shape (N,)
    """

    gains: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        gains = np.array(self.gains, dtype=complex, copy=True)
        weights = np.array(self.weights, dtype=float, copy=True)
        if gains.ndim != 2 or gains.shape[0] == 0 or gains.shape[1] == 0:
            raise InvalidArgumentError(f"gains must have shape (N, K) with N, K >= 1, got {gains.shape}")
        if weights.shape != (gains.shape[0],):
            raise InvalidArgumentError(f"weights have shape {weights.shape}, expected ({gains.shape[0]},)")
        if not np.all(np.isfinite(gains)):
            raise InvalidArgumentError("gains must be finite")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise InvalidArgumentError("weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgumentError(f"weights must sum to 1, got {weights.sum()!r}")
        gains.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "weights", weights)
        power_gains = np.abs(gains) ** 2
        power_gains.setflags(write=False)
        object.__setattr__(self, "_power_gains", power_gains)

    @property
    def num_states(self) -> int:
        return int(self.gains.shape[0])

    @property
    def K(self) -> int:
        return int(self.gains.shape[1])

    @property
    def power_gains(self) -> np.ndarray:
        """|h_k(v)|^2, shape (N, K)."""
        return self._power_gains

    def state(self, index: int) -> ChannelVector:
        return ChannelVector(self.gains[index])

    def states(self) -> list[ChannelVector]:
        return [ChannelVector(row) for row in self.gains]

    def expectation(self, values: np.ndarray) -> np.ndarray:
        """Weighted average over states of a per-state array (first axis)."""
        return self.weights @ np.asarray(values, dtype=float)


def rayleigh_ensemble(
    K: int, N: int, sigma_h_sq: float = 1.0, seed: Optional[int] = None
) -> FadingEnsemble:
    """Draw N i.i.d. Rayleigh states with equal weights.

    h_k = (x + i y) * sqrt(sigma_h^2 / 2) with x, y independent standard normal.

    Args:
        K: Number of devices
        N: Number of fading states
        sigma_h_sq: Average channel power gain E|h|^2
        seed: Seed for numpy's default generator

    Returns:
        FadingEnsemble with weights 1/N

    Raises:
        InvalidArgumentError: If K, N or sigma_h_sq is not positive
    """
    if K < 1:
        raise InvalidArgumentError(f"K must be positive, got {K}")
    if N < 1:
        raise InvalidArgumentError(f"N must be positive, got {N}")
    if not sigma_h_sq > 0:
        raise InvalidArgumentError(f"sigma_h_sq must be positive, got {sigma_h_sq}")

    rng = np.random.default_rng(seed)
    real = rng.standard_normal((N, K))
    imag = rng.standard_normal((N, K))
    gains = (real + 1j * imag) * np.sqrt(sigma_h_sq / 2.0)
    return FadingEnsemble(gains, np.full(N, 1.0 / N))


def fixed_ensemble(
    states: Sequence[Union[ChannelVector, Sequence[complex]]],
    weights: Optional[Sequence[float]] = None,
) -> FadingEnsemble:
    """Build an ensemble from explicit states, normalizing the weights.

    Examples:
        >>> fixed_ensemble([ChannelVector.from_power_gains([1.0])], [7.0]).weights
        array([1.])
    """
    if len(states) == 0:
        raise InvalidArgumentError("an ensemble needs at least one state")
    rows = [s.gains if isinstance(s, ChannelVector) else np.asarray(s, dtype=complex) for s in states]
    sizes = {np.shape(row) for row in rows}
    if len(sizes) != 1:
        raise InvalidArgumentError(f"all states must have the same number of devices, got {sorted(sizes)}")

    if weights is None:
        weights = np.ones(len(rows))
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(rows),):
        raise InvalidArgumentError(f"expected {len(rows)} weights, got {weights.shape[0] if weights.ndim else 0}")
    if np.any(weights <= 0):
        raise InvalidArgumentError("weights must be positive")
    return FadingEnsemble(np.vstack(rows), weights / weights.sum())


def static_ensemble(ch: ChannelVector) -> FadingEnsemble:
    """Single-state ensemble wrapping a static channel."""
    return fixed_ensemble([ch])
