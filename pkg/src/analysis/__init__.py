"""Statistics and acceptance checks for AirComp experiments."""

from .statistics import mean_confidence_interval, progressive_sampling_stopping_criteria, standard_error

__all__ = [
    "mean_confidence_interval",
    "progressive_sampling_stopping_criteria",
    "standard_error",
]
