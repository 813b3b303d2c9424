import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from inertia import (
    DiscreteState,
    InvalidArgument,
    NumericalFailure,
    State,
    discrete_inertia,
    drift_profile,
    inertia,
    momentum_step,
    quadratic_isotropic,
)

ISO1 = quadratic_isotropic(1)


def test_single_step_worked_example():
    out = momentum_step(DiscreteState([1.0], [0.0]), 0.1, ISO1)
    assert_allclose(out.v, [-0.1], rtol=1e-15)
    assert_allclose(out.w, [0.99], rtol=1e-15)
    assert out.step_index == 1


def test_small_step_example():
    out = momentum_step(DiscreteState([1.0], [0.0]), 0.01, ISO1)
    assert_allclose(out.v, [-0.01], rtol=1e-15)
    assert_allclose(out.w, [0.9999], rtol=1e-15)


def test_minimum_is_a_fixed_point():
    out = momentum_step(DiscreteState([0.0], [0.0]), 0.1, ISO1)
    assert np.array_equal(out.w, [0.0])
    assert np.array_equal(out.v, [0.0])


def test_energy_values():
    assert discrete_inertia(DiscreteState([1.0], [0.0]), ISO1) == 0.5
    assert discrete_inertia(DiscreteState([0.0], [0.0]), ISO1) == 0.0
    after = momentum_step(DiscreteState([1.0], [0.0]), 0.1, ISO1)
    assert discrete_inertia(after, ISO1) == pytest.approx(0.49505, abs=1e-10)


@given(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))
def test_energy_matches_continuous_functional(w, v):
    """Same (w, v) must give the same number through either energy function."""
    a = discrete_inertia(DiscreteState([w], [v]), ISO1)
    b = inertia(State([w], [v]), ISO1)
    assert a == b


def test_argument_validation():
    with pytest.raises(InvalidArgument):
        momentum_step(DiscreteState([1.0], [0.0]), 0.0, ISO1)
    with pytest.raises(InvalidArgument):
        momentum_step(DiscreteState([1.0, 2.0], [0.0, 0.0]), 0.1, ISO1)
    with pytest.raises(InvalidArgument):
        DiscreteState([1.0, 2.0], [0.0])
    with pytest.raises(InvalidArgument):
        DiscreteState([1.0], [0.0], step_index=-1)
    with pytest.raises(InvalidArgument):
        drift_profile([1.0], [0.0], 0.01, 0, ISO1)


def test_drift_small_step_stays_within_one_percent():
    series, max_drift = drift_profile([1.0], [0.0], 0.01, 1000, ISO1)
    assert series.shape == (1001,)
    assert max_drift / series[0] <= 0.01


def test_drift_at_minimum_is_zero():
    _, max_drift = drift_profile([0.0], [0.0], 0.01, 100, ISO1)
    assert max_drift == 0.0


def test_drift_halves_quadratically_with_eta():
    # Fixed horizon 10: eta and eta/2 with matching step counts.
    _, d1 = drift_profile([1.0], [0.0], 0.01, 1000, ISO1)
    _, d2 = drift_profile([1.0], [0.0], 0.005, 2000, ISO1)
    assert 1.5 <= d1 / d2 <= 4.5


@pytest.mark.parametrize("eta", [0.005, 0.01, 0.02, 0.1, 0.5])
def test_transition_determinant_is_exactly_one(eta):
    """Probe the linear map with basis vectors; det must be 1.0 exactly.

    On the unit quadratic the update is linear:
        (w, v) -> ((1 - eta^2) w + eta v, -eta w + v)
    """
    e_w = momentum_step(DiscreteState([1.0], [0.0]), eta, ISO1)
    e_v = momentum_step(DiscreteState([0.0], [1.0]), eta, ISO1)
    det = e_w.w[0] * e_v.v[0] - e_v.w[0] * e_w.v[0]
    assert det == 1.0


def test_stable_step_size_stays_bounded():
    # eta just under the threshold 2: wild oscillation, but no growth.
    series, _ = drift_profile([1.0], [0.0], 1.9, 100_000, ISO1)
    assert float(series.max()) <= 10.0 + 1e-9


def test_unstable_step_size_blows_up():
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalFailure) as exc:
            drift_profile([1.0], [0.0], 2.1, 2000, ISO1)
    assert exc.value.step_index > 0


def test_profile_matches_repeated_steps():
    series, _ = drift_profile([1.0], [0.5], 0.1, 20, ISO1)
    s = DiscreteState([1.0], [0.5])
    for k in range(1, 21):
        s = momentum_step(s, 0.1, ISO1)
        assert series[k] == discrete_inertia(s, ISO1)
