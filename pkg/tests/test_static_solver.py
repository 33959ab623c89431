"""Tests for the static-channel optimal power control."""

import numpy as np
import pytest

from src.analysis.acceptance import static_property_violations
from src.analysis.instances import static_instances
from src.domain.errors import DegenerateChannelError, InvalidArgumentError
from src.domain.mse import mse_single_state
from src.domain.system import ChannelVector, SystemConfig
from src.solvers.static import (
    asymptotic_static,
    eta_tilde,
    eta_tilde_sequence,
    solve_static,
    solve_static_by_enumeration,
    static_grid_objective,
    threshold_function,
)


class TestEtaTilde:
    """Stationary points of the per-interval objective."""

    def test_single_device(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        assert eta_tilde(cfg, ChannelVector.from_power_gains([1.0]), 1) == pytest.approx(4.0)

    def test_two_devices(self):
        cfg = SystemConfig.uniform(2, noise_var=2.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        assert eta_tilde(cfg, ch, 1) == pytest.approx(9.0)
        assert eta_tilde(cfg, ch, 2) == pytest.approx(49.0 / 9.0)

    def test_noiseless_first_point_is_weakest_quality(self):
        seq = eta_tilde_sequence(np.array([2.5, 3.0]), 0.0)
        assert seq[0] == pytest.approx(2.5)

    def test_rank_out_of_range(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            eta_tilde(cfg, ChannelVector.from_power_gains([1.0, 4.0]), 3)

    def test_threshold_function_first_entry(self):
        J = threshold_function(np.array([1.0, 4.0]), 2.0)
        assert J[0] == pytest.approx(-2.0)
        # sqrt(4)*1 - 1 - 2
        assert J[1] == pytest.approx(-1.0)


class TestSolveStatic:
    """Threshold-structured optimum."""

    def test_all_devices_at_full_power(self):
        cfg = SystemConfig.uniform(2, noise_var=2.0)
        sol = solve_static(cfg, ChannelVector.from_power_gains([1.0, 4.0]))
        assert sol.k_star == 2
        assert sol.eta_star == pytest.approx(49.0 / 9.0)
        np.testing.assert_allclose(sol.powers, [1.0, 1.0])
        assert sol.objective == pytest.approx(5.0 / 7.0, rel=1e-12)

    def test_low_noise_inverts_strong_device(self):
        cfg = SystemConfig.uniform(2, noise_var=0.01)
        sol = solve_static(cfg, ChannelVector.from_power_gains([1.0, 4.0]))
        assert sol.k_star == 1
        assert sol.eta_star == pytest.approx(1.0201)
        np.testing.assert_allclose(sol.powers, [1.0, 0.255025])

    def test_powers_in_original_order(self):
        cfg = SystemConfig.uniform(2, noise_var=0.01)
        sol = solve_static(cfg, ChannelVector.from_power_gains([4.0, 1.0]))
        assert sol.order == (1, 0)
        np.testing.assert_allclose(sol.powers, [0.255025, 1.0])
        assert sol.full_power_devices == (1,)

    def test_objective_matches_mse(self):
        cfg = SystemConfig(K=3, noise_var=0.5, power_budgets=(1.0, 2.0, 0.5))
        ch = ChannelVector.from_power_gains([0.3, 2.0, 5.0])
        sol = solve_static(cfg, ch)
        report = mse_single_state(cfg, ch, sol.powers, sol.eta_star)
        assert sol.objective == pytest.approx(report.total_unscaled)

    def test_powers_within_budget(self):
        cfg = SystemConfig(K=3, noise_var=0.5, power_budgets=(1.0, 2.0, 0.5))
        sol = solve_static(cfg, ChannelVector.from_power_gains([0.3, 2.0, 5.0]))
        assert np.all(sol.powers <= cfg.budgets * (1 + 1e-12))

    def test_permuting_devices_permutes_powers(self):
        cfg = SystemConfig(K=5, noise_var=0.2, power_budgets=(1.0, 0.5, 2.0, 1.5, 0.8))
        gains = np.array([0.4, 2.5, 0.9, 1.7, 3.2])
        perm = np.array([3, 0, 4, 2, 1])
        sol = solve_static(cfg, ChannelVector.from_power_gains(gains))
        permuted_cfg = SystemConfig(K=5, noise_var=0.2, power_budgets=tuple(cfg.budgets[perm]))
        permuted = solve_static(permuted_cfg, ChannelVector.from_power_gains(gains[perm]))
        assert permuted.k_star == sol.k_star
        assert permuted.eta_star == pytest.approx(sol.eta_star, rel=1e-12)
        assert permuted.objective == pytest.approx(sol.objective, rel=1e-12)
        np.testing.assert_allclose(permuted.powers, sol.powers[perm], rtol=1e-12)

    def test_zero_gain_rejected(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        with pytest.raises(DegenerateChannelError):
            solve_static(cfg, ChannelVector.from_power_gains([0.0, 1.0]))

    def test_device_count_mismatch(self):
        cfg = SystemConfig.uniform(3, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            solve_static(cfg, ChannelVector.from_power_gains([1.0, 2.0]))


class TestAgainstReferences:
    """Agreement with enumeration and grid search on random instances."""

    @pytest.fixture
    def instances(self):
        return list(static_instances(25, seed=11))

    def test_enumeration_agrees(self, instances):
        for inst in instances:
            fast = solve_static(inst.cfg, inst.channel)
            slow = solve_static_by_enumeration(inst.cfg, inst.channel)
            assert fast.objective == pytest.approx(slow.objective, rel=1e-12, abs=1e-12)

    def test_grid_never_beats_solver(self, instances):
        for inst in instances[:8]:
            sol = solve_static(inst.cfg, inst.channel)
            grid_value, _ = static_grid_objective(inst.cfg, inst.channel, num_points=100_000)
            assert grid_value >= sol.objective * (1 - 1e-9)
            assert grid_value == pytest.approx(sol.objective, rel=1e-4)

    def test_structural_properties_hold(self, instances):
        for inst in instances:
            sol = solve_static(inst.cfg, inst.channel)
            assert static_property_violations(inst.cfg, inst.channel, sol) == []

    def test_grid_needs_two_points(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            static_grid_objective(cfg, ChannelVector.from_power_gains([1.0]), num_points=1)


class TestAsymptoticStatic:
    """Limiting policies at high and low SNR."""

    def test_high_snr_is_channel_inversion(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        sol = asymptotic_static(cfg, ChannelVector.from_power_gains([1.0, 4.0]), "high_snr")
        assert sol.eta_star == pytest.approx(1.0)
        np.testing.assert_allclose(sol.powers, [1.0, 0.25])

    def test_low_snr_is_full_power(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        ch = ChannelVector.from_power_gains([1.0, 4.0])
        sol = asymptotic_static(cfg, ch, "low_snr")
        np.testing.assert_allclose(sol.powers, [1.0, 1.0])
        assert sol.eta_star == pytest.approx(eta_tilde(cfg, ch, 2))

    def test_high_snr_approaches_optimum(self):
        cfg = SystemConfig.uniform(3, noise_var=1e-6)
        ch = ChannelVector.from_power_gains([0.5, 1.0, 3.0])
        exact = solve_static(cfg, ch).objective
        limit = asymptotic_static(cfg, ch, "high_snr").objective
        assert limit == pytest.approx(exact, rel=1e-3)

    def test_unknown_regime(self):
        cfg = SystemConfig.uniform(1, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            asymptotic_static(cfg, ChannelVector.from_power_gains([1.0]), "medium")
