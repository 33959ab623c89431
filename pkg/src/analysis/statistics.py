"""Statistical utilities for Monte Carlo estimates.

Provides functions for:
- Standard errors of sample means
- Student-t confidence intervals across independent replicates
- Progressive sampling stopping criteria based on relative precision
"""

from typing import Sequence, Tuple

import numpy as np
from scipy import stats


def standard_error(values: Sequence[float]) -> float:
    """Standard error of the sample mean (ddof = 1); zero for a single value."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must not be empty")
    if values.size == 1:
        return 0.0
    return float(stats.sem(values))


def mean_confidence_interval(
    values: Sequence[float], confidence_level: float = 0.95
) -> Tuple[float, float, float]:
    """Student-t confidence interval for the mean of independent replicates.

    Args:
        values: Replicate estimates
        confidence_level: Confidence level (default 0.95)

    Returns:
        Tuple of (lower_bound, upper_bound, mean)

    Raises:
        ValueError: If values is empty or confidence_level not in (0, 1)

    Examples:
        >>> mean_confidence_interval([1.0, 1.0, 1.0])
        (1.0, 1.0, 1.0)
    """
    if not 0 < confidence_level < 1:
        raise ValueError(f"confidence_level must be in (0, 1), got {confidence_level}")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must not be empty")
    mean = float(values.mean())
    error = standard_error(values)
    if error == 0.0:
        return (mean, mean, mean)
    lower, upper = stats.t.interval(confidence_level, values.size - 1, loc=mean, scale=error)
    return (float(lower), float(upper), mean)


def progressive_sampling_stopping_criteria(
    mean: float, std_error: float, target_precision: float = 0.01
) -> bool:
    """True once the standard error is within target_precision of |mean|.

    Examples:
        >>> progressive_sampling_stopping_criteria(1.0, 0.005, target_precision=0.01)
        True
    """
    if not target_precision > 0:
        raise ValueError(f"target_precision must be positive, got {target_precision}")
    if mean == 0.0:
        return std_error == 0.0
    return std_error <= target_precision * abs(mean)
