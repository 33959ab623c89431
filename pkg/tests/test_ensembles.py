"""Tests for fading ensemble construction."""

import numpy as np
import pytest

from src.domain.ensemble import FadingEnsemble, fixed_ensemble, rayleigh_ensemble, static_ensemble
from src.domain.errors import InvalidArgumentError
from src.domain.system import ChannelVector


class TestRayleighEnsemble:
    """Seeded Rayleigh draws."""

    def test_mean_power_gain(self):
        ens = rayleigh_ensemble(1, 100_000, seed=0)
        assert 0.99 <= ens.expectation(ens.power_gains)[0] <= 1.01

    def test_devices_uncorrelated(self):
        ens = rayleigh_ensemble(2, 100_000, seed=1)
        corr = np.corrcoef(ens.power_gains[:, 0], ens.power_gains[:, 1])[0, 1]
        assert abs(corr) <= 0.01

    def test_scales_with_average_gain(self):
        ens = rayleigh_ensemble(1, 50_000, sigma_h_sq=4.0, seed=2)
        assert ens.expectation(ens.power_gains)[0] == pytest.approx(4.0, rel=0.03)

    def test_same_seed_same_states(self):
        a = rayleigh_ensemble(3, 100, seed=42)
        b = rayleigh_ensemble(3, 100, seed=42)
        np.testing.assert_array_equal(a.gains, b.gains)

    def test_power_gain_tail_is_exponential(self):
        ens = rayleigh_ensemble(1, 100_000, seed=7)
        tail = ens.expectation((ens.power_gains > 1.0).astype(float))[0]
        assert abs(tail - np.exp(-1.0)) <= 0.01

    def test_equal_weights(self):
        ens = rayleigh_ensemble(2, 8, seed=3)
        np.testing.assert_allclose(ens.weights, np.full(8, 1 / 8))

    @pytest.mark.parametrize("K,N,sigma", [(0, 10, 1.0), (2, 0, 1.0), (2, 10, 0.0)])
    def test_invalid_arguments(self, K, N, sigma):
        with pytest.raises(InvalidArgumentError):
            rayleigh_ensemble(K, N, sigma)


class TestFixedEnsemble:
    """Explicit ensembles with normalized weights."""

    def test_single_state_weight_normalized(self):
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0])], [7.0])
        np.testing.assert_allclose(ens.weights, [1.0])

    def test_equal_weights_normalized(self):
        states = [ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([4.0])]
        ens = fixed_ensemble(states, [1.0, 1.0])
        np.testing.assert_allclose(ens.weights, [0.5, 0.5])

    def test_mismatched_device_count(self):
        states = [ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([1.0, 2.0])]
        with pytest.raises(InvalidArgumentError):
            fixed_ensemble(states)

    def test_nonpositive_weight(self):
        states = [ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([4.0])]
        with pytest.raises(InvalidArgumentError):
            fixed_ensemble(states, [1.0, 0.0])

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            fixed_ensemble([])

    def test_static_ensemble_wraps_channel(self):
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        ens = static_ensemble(ch)
        assert ens.num_states == 1
        np.testing.assert_allclose(ens.state(0).power_gains, [1.0, 4.0])


class TestFadingEnsembleValidation:
    """Direct construction checks."""

    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidArgumentError):
            FadingEnsemble(np.ones((2, 1)), np.array([0.5, 0.6]))

    def test_arrays_read_only(self):
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0])])
        with pytest.raises(ValueError):
            ens.power_gains[0, 0] = 2.0
