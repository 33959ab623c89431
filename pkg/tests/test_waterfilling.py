"""Tests for the single power-limited device water-filling policy."""

import numpy as np
import pytest

from src.domain.ensemble import fixed_ensemble, rayleigh_ensemble
from src.domain.errors import InvalidArgumentError
from src.domain.mse import mse_ensemble
from src.domain.system import ChannelVector, SystemConfig
from src.solvers.fading import outer_solve
from src.solvers.waterfilling import p1_closed_form, solve_p3


def test_p1_silent_at_cutoff():
    assert p1_closed_form(1.0, 1.0, 1.0) == 0.0


def test_p1_above_cutoff():
    assert p1_closed_form(2.0, 1.0, 1.0) == pytest.approx(0.25)


def test_p1_peak_at_twice_cutoff():
    """Power peaks at 1/(4 mu) where |h| is twice the cutoff."""
    h = np.linspace(0.5, 6.0, 1101)
    powers = p1_closed_form(h, 0.8, 1.25)
    cutoff = np.sqrt(0.8 * 1.25)
    assert h[np.argmax(powers)] == pytest.approx(2 * cutoff, abs=0.01)
    assert powers.max() == pytest.approx(1 / (4 * 0.8), rel=1e-4)


def test_p1_rejects_nonpositive_price():
    with pytest.raises(InvalidArgumentError):
        p1_closed_form(1.0, 0.0, 1.0)


class TestSolveP3:
    """Budget price and recovered policy."""

    def test_two_state_worked_example(self):
        cfg = SystemConfig(K=1, noise_var=1.0, power_budgets=(0.2,))
        ens = fixed_ensemble([ChannelVector.from_power_gains([1.0]), ChannelVector.from_power_gains([4.0])])
        solution = solve_p3(cfg, ens)
        assert solution.mu1 == pytest.approx((6.0 / 6.6) ** 2, rel=1e-9)
        np.testing.assert_allclose(solution.policy.powers[:, 0], [0.1, 0.3], rtol=1e-9)
        np.testing.assert_allclose(solution.policy.denoise, [12.1, 121.0 / 30.0], rtol=1e-9)
        report = mse_ensemble(cfg, ens, solution.policy)
        assert report.total_unscaled == pytest.approx(0.5 * (1 / 1.1 + 1 / 2.2), rel=1e-9)

    def test_budget_met_with_equality(self):
        cfg = SystemConfig(K=1, noise_var=0.5, power_budgets=(0.3,))
        ens = rayleigh_ensemble(1, 1000, seed=8)
        solution = solve_p3(cfg, ens)
        assert solution.realized_powers[0] == pytest.approx(0.3, rel=1e-8)
        assert solution.peak_gain == pytest.approx(2 * solution.threshold)

    def test_matches_general_solver_for_one_device(self):
        cfg = SystemConfig(K=1, noise_var=1.0, power_budgets=(0.5,))
        ens = rayleigh_ensemble(1, 500, seed=12)
        closed = mse_ensemble(cfg, ens, solve_p3(cfg, ens).policy).total_unscaled
        general = outer_solve(cfg, ens, tol=1e-9).primal_value
        assert general == pytest.approx(closed, rel=1e-5)

    def test_price_satisfies_stationarity_on_transmitting_states(self):
        cfg = SystemConfig(K=3, noise_var=0.4, power_budgets=(0.3, 1.0, 1.0))
        ens = rayleigh_ensemble(3, 2000, seed=21)
        solution = solve_p3(cfg, ens)
        p1 = solution.policy.powers[:, 0]
        gains = ens.power_gains[:, 0]
        active = p1 > 0
        assert active.any() and not active.all()
        implied = cfg.noise_var * gains[active] / (cfg.noise_var + p1[active] * gains[active]) ** 2
        np.testing.assert_allclose(implied, solution.mu1, rtol=1e-8)

    def test_power_rises_then_falls_along_channel_grid(self):
        cfg = SystemConfig(K=2, noise_var=1.0, power_budgets=(0.4, 1.0))
        ens = rayleigh_ensemble(2, 3000, seed=22)
        solution = solve_p3(cfg, ens)
        magnitudes = np.abs(ens.gains[:, 0])
        order = np.argsort(magnitudes)
        h = magnitudes[order]
        p1 = solution.policy.powers[order, 0]
        assert np.all(p1[h <= solution.threshold] == 0.0)
        rising = (h > solution.threshold) & (h <= solution.peak_gain)
        falling = h >= solution.peak_gain
        assert rising.sum() > 10 and falling.sum() > 10
        assert np.all(np.diff(p1[rising]) >= 0.0)
        assert np.all(np.diff(p1[falling]) <= 0.0)
        assert p1.max() <= 1 / (4 * solution.mu1) + 1e-12

    def test_denoise_has_v_shape(self):
        cfg = SystemConfig(K=2, noise_var=1.0, power_budgets=(0.4, 1.0))
        ens = rayleigh_ensemble(2, 3000, seed=22)
        solution = solve_p3(cfg, ens)
        magnitudes = np.abs(ens.gains[:, 0])
        active = solution.policy.powers[:, 0] > 0
        order = np.argsort(magnitudes[active])
        h = magnitudes[active][order]
        eta = solution.policy.denoise[active][order]
        left, right = eta[h <= solution.peak_gain], eta[h >= solution.peak_gain]
        assert np.all(np.diff(left) <= 1e-12 * left[1:])
        assert np.all(np.diff(right) >= -1e-12 * right[1:])

    def test_other_devices_align_exactly(self):
        cfg = SystemConfig(K=2, noise_var=1.0, power_budgets=(0.5, 1.0))
        ens = rayleigh_ensemble(2, 200, seed=1)
        solution = solve_p3(cfg, ens, limited_device=0)
        active = ~solution.policy.silent_states
        received = solution.policy.powers[active, 1] * ens.power_gains[active, 1]
        np.testing.assert_allclose(received, solution.policy.denoise[active])

    def test_silent_states_are_silent_for_everyone(self):
        cfg = SystemConfig(K=2, noise_var=1.0, power_budgets=(0.5, 1.0))
        ens = rayleigh_ensemble(2, 200, seed=1)
        solution = solve_p3(cfg, ens)
        silent = solution.policy.silent_states
        assert np.all(solution.policy.powers[silent] == 0.0)

    def test_device_index_out_of_range(self):
        cfg = SystemConfig.uniform(2, noise_var=1.0)
        with pytest.raises(InvalidArgumentError):
            solve_p3(cfg, rayleigh_ensemble(2, 10, seed=0), limited_device=2)
