import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from inertia import (
    IntegratorConfig,
    InvalidArgument,
    State,
    SystemSpec,
    Trajectory,
    closed_form_underdamped,
    damped_period,
    ensemble_expected_decay,
    fit_decay_rate,
    integrate,
    quadratic_isotropic,
    sweep_gamma,
)

ISO1 = quadratic_isotropic(1)


def damped_run(gamma, h=0.01, t_end=10.0, w0=1.0, v0=0.0):
    spec = SystemSpec(landscape=ISO1, gamma=gamma)
    method = "verlet" if gamma == 0 else "damped_splitting"
    cfg = IntegratorConfig(method=method, h=h, t_end=t_end)
    return integrate(spec, State([w0], [v0]), cfg)


# --- closed form ---------------------------------------------------------------

def test_frictionless_solution_is_cosine():
    sol = closed_form_underdamped(0.0, 1.0, 0.0)
    assert sol.omega == 1.0
    t = np.linspace(0.0, 10.0, 101)
    assert_allclose(sol.position(t), np.cos(t), atol=1e-15)
    assert abs(sol.position(math.pi) + 1.0) <= 1e-12
    assert abs(sol.velocity(math.pi)) <= 1e-12


def test_damped_solution_coefficients():
    sol = closed_form_underdamped(0.4, 1.0, 0.0)
    assert sol.A == 1.0
    assert sol.omega == pytest.approx(0.9797958971132712, abs=1e-15)
    assert sol.B == pytest.approx(0.20412414523193154, abs=1e-15)
    # spot values at t = 10
    assert sol.position(10.0) == pytest.approx(-0.1360920475956015, abs=1e-12)
    assert sol.velocity(10.0) == pytest.approx(0.05035788416141193, abs=1e-12)


def test_solution_matches_initial_conditions():
    sol = closed_form_underdamped(0.7, -2.0, 1.5)
    w, v = sol.evaluate(0.0)
    assert w == pytest.approx(-2.0, abs=1e-14)
    assert v == pytest.approx(1.5, abs=1e-14)


def test_closed_form_rejects_out_of_range_gamma():
    for gamma in (-0.1, 2.0, 2.5):
        with pytest.raises(InvalidArgument):
            closed_form_underdamped(gamma, 1.0, 0.0)
        with pytest.raises(InvalidArgument):
            damped_period(gamma)


def test_residual_of_the_motion_equation_is_tiny():
    """d2w/dt2 + gamma dw/dt + w should vanish along the solution."""
    sol = closed_form_underdamped(0.4, 1.0, 0.0)
    t = np.linspace(0.0, 10.0, 1000)
    residual = sol.acceleration(t) + 0.4 * sol.velocity(t) + sol.position(t)
    assert np.max(np.abs(residual)) <= 1e-9


@given(st.floats(0.0, 1.99), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=50)
def test_frequency_identity_property(gamma, w0, v0):
    sol = closed_form_underdamped(gamma, w0, v0)
    assert sol.omega ** 2 + gamma ** 2 / 4.0 == pytest.approx(1.0, abs=1e-14)
    # and the ICs always round-trip
    assert sol.position(0.0) == pytest.approx(w0, abs=1e-12)
    assert sol.velocity(0.0) == pytest.approx(v0, abs=max(1e-12, 1e-12 * abs(v0)))


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=30)
def test_frictionless_energy_is_constant_property(w0, v0):
    sol = closed_form_underdamped(0.0, w0, v0)
    t = np.linspace(0.0, 20.0, 200)
    e = sol.inertia(t)
    e0 = 0.5 * (w0 * w0 + v0 * v0)
    assert np.max(np.abs(e - e0)) <= 1e-13 * max(1.0, e0)


# --- decay-rate fitting -----------------------------------------------------------

def synthetic_trajectory(times, energies):
    """Wrap plain arrays so the fitter can consume them."""
    n = len(times)
    spec = SystemSpec(landscape=ISO1, gamma=0.4)
    cfg = IntegratorConfig(method="damped_splitting", h=times[1] - times[0], t_end=times[-1])
    zeros = np.zeros((n, 1))
    return Trajectory(np.asarray(times), zeros, zeros, np.asarray(energies), spec, cfg)


def test_fit_recovers_exact_exponential():
    t = np.linspace(0.0, 10.0, 1001)
    traj = synthetic_trajectory(t, 0.5 * np.exp(-0.4 * t))
    fit = fit_decay_rate(traj, (0.0, 10.0))
    assert fit.gamma_hat == pytest.approx(0.4, abs=1e-10)
    assert fit.r_squared >= 1.0 - 1e-12
    assert fit.n_points == 1001


def test_fit_window_is_respected():
    t = np.linspace(0.0, 10.0, 1001)
    traj = synthetic_trajectory(t, 0.5 * np.exp(-0.4 * t))
    fit = fit_decay_rate(traj, (2.0, 6.0))
    assert fit.window[0] == pytest.approx(2.0)
    assert fit.window[1] == pytest.approx(6.0)
    assert fit.n_points == 401


def test_fit_rejects_bad_windows():
    t = np.linspace(0.0, 10.0, 1001)
    traj = synthetic_trajectory(t, 0.5 * np.exp(-0.4 * t))
    with pytest.raises(InvalidArgument):
        fit_decay_rate(traj, (6.0, 2.0))
    with pytest.raises(InvalidArgument):
        fit_decay_rate(traj, (0.0, 50.0))
    with pytest.raises(InvalidArgument):
        fit_decay_rate(traj, (0.0, 0.05))  # fewer than 10 samples


def test_fit_rejects_nonpositive_energy():
    t = np.linspace(0.0, 10.0, 101)
    e = 0.5 * np.exp(-0.4 * t)
    e[50] = 0.0
    with pytest.raises(InvalidArgument):
        fit_decay_rate(synthetic_trajectory(t, e), (0.0, 10.0))


def test_fit_on_conservative_run_gives_zero_rate():
    traj = damped_run(0.0, t_end=5 * damped_period(0.0))
    fit = fit_decay_rate(traj, (0.0, traj.times[-1]))
    assert abs(fit.gamma_hat) <= 1e-4


def test_fit_on_damped_run_near_true_rate():
    # integer number of periods, raw (unsmoothed) fit
    period = damped_period(0.4)
    traj = damped_run(0.4, t_end=5 * period)
    fit = fit_decay_rate(traj, (0.0, traj.times[-1]))
    assert 0.38 <= fit.gamma_hat <= 0.42


def test_period_averaging_removes_the_wobble():
    period = damped_period(0.4)
    traj = damped_run(0.4, t_end=5 * period)
    raw = fit_decay_rate(traj, (0.0, traj.times[-1]))
    smooth = fit_decay_rate(traj, (0.0, traj.times[-1]), smooth_period=period)
    assert smooth.r_squared >= 0.999
    assert smooth.r_squared > raw.r_squared
    assert smooth.gamma_hat == pytest.approx(0.4, abs=1e-4)
    # smoothing trims half a period at each end
    assert smooth.n_points < raw.n_points


def test_smoothing_window_must_fit():
    t = np.linspace(0.0, 1.0, 101)
    traj = synthetic_trajectory(t, 0.5 * np.exp(-0.4 * t))
    with pytest.raises(InvalidArgument):
        fit_decay_rate(traj, (0.0, 1.0), smooth_period=5.0)


# --- gamma sweep ----------------------------------------------------------------

def test_sweep_recovers_each_rate():
    entries = sweep_gamma([0.1, 0.2, 0.4, 0.8])
    assert [e.gamma for e in entries] == [0.1, 0.2, 0.4, 0.8]
    for e in entries:
        assert e.error is None
        assert abs(e.gamma_hat - e.gamma) / e.gamma <= 0.05
    hats = [e.gamma_hat for e in entries]
    assert hats == sorted(hats)  # monotone in gamma


def test_sweep_handles_gamma_zero():
    (entry,) = sweep_gamma([0.0])
    assert entry.error is None
    assert abs(entry.gamma_hat) <= 1e-4


def test_sweep_captures_per_entry_failures():
    entries = sweep_gamma([0.4, 2.5])
    assert entries[0].error is None
    assert entries[1].gamma_hat is None
    assert "2.5" in entries[1].error


def test_sweep_sorts_input():
    entries = sweep_gamma([0.8, 0.1])
    assert [e.gamma for e in entries] == [0.1, 0.8]


# --- ensemble balance --------------------------------------------------------------

def white_spec(sigma=0.3):
    return SystemSpec(landscape=ISO1, gamma=0.4, sigma=sigma, noise_kind="white")


def test_ensemble_argument_validation():
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=2.0, seed=0)
    with pytest.raises(InvalidArgument):
        ensemble_expected_decay(white_spec(), State([1.0], [0.0]), cfg, 50)
    with pytest.raises(InvalidArgument):
        ensemble_expected_decay(SystemSpec(landscape=ISO1, gamma=0.4), State([1.0], [0.0]),
                                IntegratorConfig(method="damped_splitting", h=0.01, t_end=2.0), 100)
    coarse = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=2.0, record_every=5)
    with pytest.raises(InvalidArgument):
        ensemble_expected_decay(white_spec(), State([1.0], [0.0]), coarse, 100)
    with pytest.raises(InvalidArgument):
        ensemble_expected_decay(white_spec(), State([1.0], [0.0]), cfg, 100, burn_in=2.0)


def test_degenerate_ensemble_collapses_to_deterministic():
    """sigma = 0: every member is the damped run, so scatter is exactly zero."""
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=5.0, seed=0)
    res = ensemble_expected_decay(white_spec(sigma=0.0), State([1.0], [0.0]), cfg, 100)
    assert res.n_members == 100
    assert np.all(res.inertia.stderr_series == 0.0)
    assert res.balance_stderr == 0.0
    # averaging 100 identical rows can round in the last ulp, so not bitwise
    traj = damped_run(0.4, t_end=5.0)
    assert_allclose(res.inertia.mean_series, traj.inertia, rtol=1e-14, atol=0.0)


def test_degenerate_ensemble_satisfies_decay_identity():
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=5.0, seed=0)
    res = ensemble_expected_decay(white_spec(sigma=0.0), State([1.0], [0.0]), cfg, 100)
    interior = slice(1, -1)
    gap = res.inertia_rate.mean_series[interior] + 0.4 * res.speed_squared.mean_series[interior]
    assert np.max(np.abs(gap)) <= 1e-4  # centered-difference O(h^2)


def test_white_noise_balance_within_three_standard_errors():
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=5.0, seed=0)
    res = ensemble_expected_decay(white_spec(), State([1.0], [0.0]), cfg, 200)
    assert abs(res.balance_residual) <= 3.0 * res.balance_stderr


def test_correlated_noise_balance_needs_the_work_term():
    """With the <eta, v> term the budget closes; without it, it fails loudly."""
    spec = SystemSpec(landscape=ISO1, gamma=0.4, sigma=0.3, noise_kind="ou", tau=0.5)
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=20.0, seed=0)
    res = ensemble_expected_decay(spec, State([1.0], [0.0]), cfg, 200, burn_in=10.0)
    assert abs(res.balance_residual) <= 3.0 * res.balance_stderr

    # drop the work term: the residual should sit far outside the noise band
    sl = (res.times >= 10.0) & (res.times < res.times[-1])
    broken = float(np.mean(res.inertia_rate.mean_series[sl])
                   + 0.4 * np.mean(res.speed_squared.mean_series[sl]))
    assert abs(broken) > 30.0 * (3.0 * res.balance_stderr)


def test_ensemble_is_deterministic():
    cfg = IntegratorConfig(method="stochastic_splitting", h=0.01, t_end=2.0, seed=9)
    a = ensemble_expected_decay(white_spec(), State([1.0], [0.0]), cfg, 100)
    b = ensemble_expected_decay(white_spec(), State([1.0], [0.0]), cfg, 100)
    assert a.balance_residual == b.balance_residual
    assert np.array_equal(a.inertia.mean_series, b.inertia.mean_series)
