"""Tests for the reference policies."""

import warnings

import numpy as np
import pytest

from src.domain.ensemble import rayleigh_ensemble
from src.domain.errors import InvalidArgumentError
from src.domain.mse import mse_ensemble, mse_single_state
from src.domain.system import ChannelVector, SystemConfig
from src.solvers.baselines import (
    best_traditional_cutoff,
    full_power_static,
    traditional_inversion,
    uniform_power_fading,
)
from src.solvers.static import solve_static


class TestFullPower:
    def test_full_power_denoise(self):
        cfg = SystemConfig.uniform(2, noise_var=2.0)
        policy = full_power_static(cfg, ChannelVector.from_power_gains([1.0, 4.0]))
        np.testing.assert_allclose(policy.powers[0], [1.0, 1.0])
        assert policy.denoise[0] == pytest.approx(49.0 / 9.0)

    def test_partially_dead_channel_is_warning_free(self):
        cfg = SystemConfig.uniform(3, noise_var=1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            policy = full_power_static(cfg, ChannelVector.from_power_gains([0.0, 0.0, 4.0]))
        # (1 + 4) / 2 squared
        assert policy.denoise[0] == pytest.approx(6.25)

    def test_not_better_than_optimal(self):
        cfg = SystemConfig(K=3, noise_var=0.05, power_budgets=(1.0, 0.5, 2.0))
        ch = ChannelVector.from_power_gains([0.4, 1.5, 3.0])
        policy = full_power_static(cfg, ch)
        baseline = mse_single_state(cfg, ch, policy.powers[0], policy.denoise[0]).total_unscaled
        assert solve_static(cfg, ch).objective <= baseline


class TestTraditionalInversion:
    """Truncated inversion under instantaneous caps."""

    def test_no_cutoff_static(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        policy = traditional_inversion(cfg, ChannelVector.from_power_gains([1.0, 4.0]), 0.0)
        np.testing.assert_allclose(policy.powers[0], [1.0, 0.25])
        assert policy.denoise[0] == pytest.approx(1.0)

    def test_cutoff_above_every_gain_is_silent(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        policy = traditional_inversion(cfg, ch, 10.0)
        assert policy.silent_states[0]
        report = mse_single_state(cfg, ch, policy.powers[0], policy.denoise[0])
        assert report.total_unscaled == 2.0

    def test_instantaneous_caps_hold(self):
        cfg = SystemConfig(K=3, noise_var=1.0, power_budgets=(1.0, 2.0, 0.5))
        ens = rayleigh_ensemble(3, 200, seed=0)
        policy = traditional_inversion(cfg, ens, 0.1)
        assert np.all(policy.powers <= cfg.budgets * (1 + 1e-12))

    def test_negative_cutoff_rejected(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            traditional_inversion(cfg, ChannelVector.from_power_gains([1.0]), -1.0)

    def test_best_cutoff_is_lowest_on_grid(self):
        cfg = SystemConfig.uniform(3, noise_var=0.1)
        ens = rayleigh_ensemble(3, 300, seed=1)
        grid = [0.0, 0.05, 0.1, 0.2]
        xi, _, report = best_traditional_cutoff(cfg, ens, grid)
        for candidate in grid:
            other = mse_ensemble(cfg, ens, traditional_inversion(cfg, ens, candidate)).total_unscaled
            assert report.total_unscaled <= other
        assert xi in grid


class TestUniformPower:
    def test_denoise_near_average_gain(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        ens = rayleigh_ensemble(2, 50_000, seed=4)
        policy = uniform_power_fading(cfg, ens)
        assert policy.denoise[0] == pytest.approx(1.0, rel=0.03)
        np.testing.assert_allclose(policy.expected_powers(ens.weights), cfg.budgets)
