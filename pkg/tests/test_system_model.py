"""Tests for the system model types and the closed-form MSE."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.domain.errors import InvalidArgumentError
from src.domain.ensemble import fixed_ensemble
from src.domain.mse import mse_ensemble, mse_single_state, optimal_denoise_for_powers
from src.domain.system import SILENT, ChannelVector, MseReport, PowerPolicy, SystemConfig


class TestSystemConfig:
    """Validation of the static system parameters."""

    def test_uniform_builds_equal_budgets(self):
        cfg = SystemConfig.uniform(3, noise_var=0.5, budget=2.0)
        assert cfg.power_budgets == (2.0, 2.0, 2.0)
        assert cfg.snr == (4.0, 4.0, 4.0)

    def test_rejects_zero_devices(self):
        with pytest.raises(ValueError):
            SystemConfig(K=0, noise_var=1.0, power_budgets=())

    def test_rejects_nonpositive_noise(self):
        with pytest.raises(ValueError):
            SystemConfig.uniform(2, noise_var=0.0)

    def test_rejects_budget_length_mismatch(self):
        with pytest.raises(ValueError):
            SystemConfig(K=2, noise_var=1.0, power_budgets=(1.0,))

    def test_rejects_nonpositive_budget(self):
        with pytest.raises(ValueError):
            SystemConfig(K=2, noise_var=1.0, power_budgets=(1.0, -1.0))

    def test_rejection_surfaces_as_validation_error(self):
        with pytest.raises(ValidationError, match="power_budgets has 1 entries"):
            SystemConfig(K=2, noise_var=1.0, power_budgets=(1.0,))

    def test_is_frozen(self):
        cfg = SystemConfig.uniform(2, 1.0)
        with pytest.raises(Exception):
            cfg.K = 3


class TestChannelAndPolicy:
    """ChannelVector and PowerPolicy invariants."""

    def test_power_gains_from_complex(self):
        ch = ChannelVector(np.array([1 + 1j, 2j]))
        np.testing.assert_allclose(ch.power_gains, [2.0, 4.0])

    def test_from_power_gains_rejects_negative(self):
        with pytest.raises(InvalidArgumentError):
            ChannelVector.from_power_gains([1.0, -0.5])

    def test_channel_is_read_only(self):
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        with pytest.raises(ValueError):
            ch.gains[0] = 3.0

    def test_silent_state_requires_zero_powers(self):
        with pytest.raises(InvalidArgumentError):
            PowerPolicy.single([0.1, 0.0], SILENT)

    def test_negative_power_rejected(self):
        with pytest.raises(InvalidArgumentError):
            PowerPolicy.single([-0.1, 0.0], 1.0)

    def test_expected_powers(self):
        policy = PowerPolicy(np.array([[1.0, 0.0], [3.0, 2.0]]), np.array([1.0, 2.0]))
        np.testing.assert_allclose(policy.expected_powers(np.array([0.5, 0.5])), [2.0, 1.0])

    def test_report_rejects_negative_terms(self):
        with pytest.raises(InvalidArgumentError):
            MseReport.from_terms(-1.0, 0.5, 2)


class TestMseSingleState:
    """Closed-form MSE of one channel state."""

    def test_perfect_alignment(self):
        """Channel inversion at eta=1 leaves only the noise term."""
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        report = mse_single_state(cfg, ch, [1.0, 0.25], 1.0)
        assert report.misalignment == pytest.approx(0.0, abs=1e-15)
        assert report.noise_term == pytest.approx(1.0)
        assert report.total_unscaled == pytest.approx(1.0)
        assert report.total_scaled == pytest.approx(0.25)

    def test_larger_eta_trades_noise_for_misalignment(self):
        cfg = SystemConfig.uniform(3, noise_var=0.5)
        ch = ChannelVector.from_power_gains([0.5, 1.0, 2.0])
        p = [0.8, 0.6, 0.9]
        # every received power p_k |h_k|^2 stays below the smallest eta
        reports = [mse_single_state(cfg, ch, p, eta) for eta in (2.0, 3.0, 5.0, 10.0)]
        misalignment = [r.misalignment for r in reports]
        noise = [r.noise_term for r in reports]
        assert np.all(np.diff(misalignment) > 0)
        assert np.all(np.diff(noise) < 0)

    def test_all_silent_contributes_k(self):
        cfg = SystemConfig.uniform(3, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0, 2.0, 3.0])
        report = mse_single_state(cfg, ch, [0.0, 0.0, 0.0], SILENT)
        assert report.misalignment == 3.0
        assert report.noise_term == 0.0
        assert report.total_unscaled == 3.0

    def test_full_power_value(self):
        cfg = SystemConfig.uniform(2, noise_var=2.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        report = mse_single_state(cfg, ch, [1.0, 1.0], 49.0 / 9.0)
        assert report.total_unscaled == pytest.approx(5.0 / 7.0, rel=1e-12)

    def test_infinite_eta_with_power_rejected(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0])
        with pytest.raises(InvalidArgumentError):
            mse_single_state(cfg, ch, [0.5], SILENT)

    def test_dimension_mismatch_rejected(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        with pytest.raises(InvalidArgumentError):
            mse_single_state(cfg, ch, [1.0], 1.0)

    def test_nonpositive_eta_rejected(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0])
        with pytest.raises(InvalidArgumentError):
            mse_single_state(cfg, ch, [1.0], 0.0)


class TestMseEnsemble:
    """Ensemble-average MSE."""

    def test_weighted_average_of_states(self):
        """Two equiprobable states under single-device water-filling powers."""
        cfg = SystemConfig(K=1, noise_var=1.0, power_budgets=(0.2,))
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([4.0])])
        powers = np.array([[0.1], [0.3]])
        eta = optimal_denoise_for_powers(ens.power_gains, powers, cfg.noise_var)
        report = mse_ensemble(cfg, ens, PowerPolicy(powers, eta))
        expected = 0.5 * (1.0 / 1.1 + 1.0 / 2.2)
        assert report.total_unscaled == pytest.approx(expected, rel=1e-12)

    def test_state_count_mismatch(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0])])
        policy = PowerPolicy(np.zeros((2, 1)), np.array([SILENT, SILENT]))
        with pytest.raises(InvalidArgumentError):
            mse_ensemble(cfg, ens, policy)


class TestOptimalDenoise:
    """Denoising factor refit for fixed powers."""

    def test_matches_closed_form(self):
        eta = optimal_denoise_for_powers(np.array([[1.0, 4.0]]), np.array([[1.0, 1.0]]), 2.0)
        assert eta[0] == pytest.approx(49.0 / 9.0)

    def test_all_zero_powers_silent(self):
        eta = optimal_denoise_for_powers(np.array([[1.0, 4.0]]), np.zeros((1, 2)), 1.0)
        assert np.isinf(eta[0])
