import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from inertia import (
    InvalidArgument,
    NumericalFailure,
    check_gradient,
    landscape_from_name,
    quadratic_general,
    quadratic_isotropic,
)


def test_isotropic_values_1d():
    ls = quadratic_isotropic(1)
    assert ls.dim == 1
    assert ls.value(np.array([1.0])) == 0.5
    assert_allclose(ls.gradient(np.array([1.0])), [1.0])


def test_isotropic_values_2d():
    ls = quadratic_isotropic(2)
    assert ls.value(np.array([0.0, 0.0])) == 0.0
    assert ls.value(np.array([3.0, 4.0])) == 12.5
    assert_allclose(ls.gradient(np.array([3.0, 4.0])), [3.0, 4.0])


def test_general_diagonal():
    ls = quadratic_general([[1.0, 0.0], [0.0, 4.0]])
    assert ls.value(np.array([1.0, 1.0])) == 2.5
    assert_allclose(ls.gradient(np.array([1.0, 1.0])), [1.0, 4.0])


def test_general_single_entry():
    ls = quadratic_general([[2.0]])
    assert ls.value(np.array([2.0])) == 4.0
    assert_allclose(ls.gradient(np.array([2.0])), [4.0])


def test_isotropic_matches_identity_matrix():
    # Same arithmetic path, so agreement should be exact, not approximate.
    iso = quadratic_isotropic(3)
    gen = quadratic_general(np.eye(3))
    rng = np.random.default_rng(7)
    for _ in range(20):
        w = rng.uniform(-5.0, 5.0, size=3)
        assert iso.value(w) == gen.value(w)
        assert np.array_equal(iso.gradient(w), gen.gradient(w))


def test_flat_landscape_is_allowed():
    ls = quadratic_general([[0.0]])
    assert ls.value(np.array([3.0])) == 0.0
    assert_allclose(ls.gradient(np.array([3.0])), [0.0])


def test_rejects_zero_dimension():
    with pytest.raises(InvalidArgument):
        quadratic_isotropic(0)


def test_rejects_asymmetric_matrix():
    with pytest.raises(InvalidArgument):
        quadratic_general([[1.0, 0.5], [0.25, 1.0]])


def test_rejects_indefinite_matrix():
    with pytest.raises(InvalidArgument):
        quadratic_general([[1.0, 0.0], [0.0, -0.5]])


def test_rejects_nonsquare_matrix():
    with pytest.raises(InvalidArgument):
        quadratic_general([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def test_matrix_is_read_only():
    ls = quadratic_general([[1.0, 0.0], [0.0, 4.0]])
    with pytest.raises(ValueError):
        ls.matrix[0, 0] = 9.0


def test_dimension_mismatch_raises():
    ls = quadratic_isotropic(2)
    with pytest.raises(InvalidArgument):
        ls.value(np.array([1.0, 2.0, 3.0]))
    with pytest.raises(InvalidArgument):
        ls.gradient(np.array([1.0]))


def test_batched_evaluation_matches_loop():
    ls = quadratic_general([[2.0, 0.5], [0.5, 1.0]])
    rng = np.random.default_rng(11)
    batch = rng.uniform(-5.0, 5.0, size=(40, 2))
    vals = ls.value(batch)
    grads = ls.gradient(batch)
    assert vals.shape == (40,)
    assert grads.shape == (40, 2)
    for i, w in enumerate(batch):
        assert vals[i] == ls.value(w)
        assert np.array_equal(grads[i], ls.gradient(w))


@given(
    st.lists(st.floats(-10.0, 10.0), min_size=1, max_size=4),
)
def test_value_is_even(ws):
    """Quadratic forms are invariant under w -> -w, exactly."""
    w = np.asarray(ws)
    ls = quadratic_isotropic(len(ws))
    assert ls.value(w) == ls.value(-w)
    assert np.array_equal(ls.gradient(-w), -ls.gradient(w))


@given(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))
def test_value_nonnegative_psd(a, b):
    ls = quadratic_general([[1.0, 0.0], [0.0, 4.0]])
    assert ls.value(np.array([a, b])) >= 0.0


# --- finite-difference gradient checks ------------------------------------

def test_check_gradient_simple_points():
    assert check_gradient(quadratic_isotropic(1), np.array([1.0])) < 1e-9
    assert check_gradient(quadratic_isotropic(2), np.array([0.0, 0.0])) < 1e-9
    ls = quadratic_general([[1.0, 0.0], [0.0, 4.0]])
    assert check_gradient(ls, np.array([0.3, -0.7])) < 1e-8


@pytest.mark.parametrize(
    "ls",
    [
        quadratic_isotropic(1),
        quadratic_isotropic(2),
        quadratic_isotropic(5),
        quadratic_general([[1.0, 0.0], [0.0, 4.0]]),
        quadratic_general([[2.0, 0.5], [0.5, 1.0]]),
        quadratic_general([[0.0]]),
    ],
    ids=["iso1", "iso2", "iso5", "diag14", "coupled", "flat"],
)
def test_check_gradient_random_points(ls):
    rng = np.random.default_rng(2024)
    worst = max(
        check_gradient(ls, rng.uniform(-5.0, 5.0, size=ls.dim)) for _ in range(100)
    )
    assert worst <= 1e-6


def test_check_gradient_rejects_nonfinite_point():
    with pytest.raises(InvalidArgument):
        check_gradient(quadratic_isotropic(1), np.array([np.inf]))


def test_check_gradient_flags_loss_overflow():
    # Finite point, but the quadratic overflows at w +/- fd_step.
    with np.errstate(over="ignore"), pytest.raises(NumericalFailure):
        check_gradient(quadratic_isotropic(1), np.array([1e200]))


# --- name parsing -----------------------------------------------------------

def test_from_name_isotropic():
    assert landscape_from_name("iso1d").dim == 1
    assert landscape_from_name("iso2d").dim == 2
    assert landscape_from_name("iso7d").dim == 7


def test_from_name_diagonal():
    ls = landscape_from_name("diag:1,4")
    assert ls.dim == 2
    assert_allclose(ls.matrix, [[1.0, 0.0], [0.0, 4.0]])
    flat = landscape_from_name("diag:0")
    assert flat.value(np.array([5.0])) == 0.0


@pytest.mark.parametrize("name", ["iso0d", "isoXd", "diag:", "diag:1,-4", "banana", ""])
def test_from_name_rejects_garbage(name):
    with pytest.raises(InvalidArgument):
        landscape_from_name(name)
