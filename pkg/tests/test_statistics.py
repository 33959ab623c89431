"""Tests for the statistical helpers."""

import pytest

from src.analysis.statistics import (
    mean_confidence_interval,
    progressive_sampling_stopping_criteria,
    standard_error,
)


def test_standard_error_of_single_value_is_zero():
    assert standard_error([3.0]) == 0.0


def test_standard_error_known_value():
    # sample std of [1, 2, 3] is 1
    assert standard_error([1.0, 2.0, 3.0]) == pytest.approx(1.0 / 3**0.5)


def test_standard_error_empty():
    with pytest.raises(ValueError):
        standard_error([])


class TestConfidenceInterval:
    def test_constant_values(self):
        assert mean_confidence_interval([1.0, 1.0, 1.0]) == (1.0, 1.0, 1.0)

    def test_interval_contains_mean(self):
        lower, upper, mean = mean_confidence_interval([1.0, 2.0, 3.0, 4.0])
        assert lower < mean < upper
        assert mean == pytest.approx(2.5)

    def test_wider_at_higher_confidence(self):
        values = [0.9, 1.1, 1.0, 1.3]
        narrow = mean_confidence_interval(values, 0.8)
        wide = mean_confidence_interval(values, 0.99)
        assert wide[1] - wide[0] > narrow[1] - narrow[0]

    def test_invalid_confidence(self):
        with pytest.raises(ValueError):
            mean_confidence_interval([1.0, 2.0], 1.5)


class TestStoppingCriteria:
    def test_precise_enough(self):
        assert progressive_sampling_stopping_criteria(1.0, 0.005, target_precision=0.01)

    def test_not_precise_enough(self):
        assert not progressive_sampling_stopping_criteria(1.0, 0.02, target_precision=0.01)

    def test_zero_mean_needs_zero_error(self):
        assert progressive_sampling_stopping_criteria(0.0, 0.0)
        assert not progressive_sampling_stopping_criteria(0.0, 0.1)
