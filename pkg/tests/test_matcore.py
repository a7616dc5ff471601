import numpy as np
import pytest
from hypothesis import given, strategies as st

from zzcompiler.matcore import (
    SWAP,
    X,
    XX,
    Y,
    Z,
    haar_random_su4,
    haar_random_unitary,
    kron,
    make_rng,
    matmul,
    rx,
    ry,
    rz,
    unitarity_error,
    unitary_distance,
)
from zzcompiler.validation import NotUnitaryError, check_permutation, check_probabilities, check_unitary

seeds = st.integers(0, 2**32 - 1)
angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_paulis_anticommute():
    assert np.allclose(X @ Y, 1j * Z)
    assert np.allclose(X @ Y + Y @ X, 0)
    assert np.allclose(XX, np.kron(X, X))


def test_swap_exchanges_factors(rng):
    a, b = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
    assert np.allclose(SWAP @ np.kron(a, b) @ SWAP, np.kron(b, a))


@given(seeds)
def test_haar_samples_are_unitary(seed):
    u = haar_random_unitary(4, make_rng(seed))
    assert unitarity_error(u) < 1e-12


@given(seeds)
def test_su4_has_unit_determinant(seed):
    u = haar_random_su4(make_rng(seed))
    assert abs(np.linalg.det(u) - 1) < 1e-12


def test_haar_moments():
    # E|u_00|^2 = 1/d and E|u_00|^4 = 2/(d(d+1)) for Haar U(d)
    rng = make_rng(7)
    vals = np.array([abs(haar_random_unitary(4, rng)[0, 0]) ** 2 for _ in range(20000)])
    assert abs(vals.mean() - 0.25) < 0.005
    assert abs((vals**2).mean() - 0.1) < 0.004


def test_haar_is_invariant_under_fixed_rotation():
    rng1, rng2 = make_rng(3), make_rng(4)
    v = haar_random_unitary(4, make_rng(99))
    a = [np.trace(haar_random_unitary(4, rng1)).real for _ in range(5000)]
    b = [np.trace(v @ haar_random_unitary(4, rng2)).real for _ in range(5000)]
    assert abs(np.var(a) - np.var(b)) < 0.1


def test_make_rng_streams_are_reproducible_and_distinct():
    a = make_rng(5, 1).random(8)
    assert np.array_equal(a, make_rng(5, 1).random(8))
    assert not np.array_equal(a, make_rng(5, 2).random(8))
    assert not np.array_equal(a, make_rng(5).random(8))


@given(seeds, st.floats(-np.pi, np.pi))
def test_distance_ignores_global_phase(seed, phi):
    u = haar_random_unitary(4, make_rng(seed))
    assert unitary_distance(u, np.exp(1j * phi) * u) < 1e-12


def test_distance_detects_difference(rng):
    u = haar_random_unitary(4, rng)
    assert unitary_distance(u, u @ np.kron(X, np.eye(2))) > 0.5
    with pytest.raises(ValueError):
        unitary_distance(np.eye(2), np.eye(4))


@given(angles)
def test_rotations_match_exponentials(t):
    # derived oracle: exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P
    for f, p in ((rx, X), (ry, Y), (rz, Z)):
        ref = np.cos(t / 2) * np.eye(2) - 1j * np.sin(t / 2) * p
        assert np.allclose(f(t), ref)


def test_shape_checks():
    with pytest.raises(ValueError):
        kron(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        matmul(np.eye(2), np.eye(3))


def test_validation_helpers():
    with pytest.raises(NotUnitaryError):
        check_unitary(np.ones((2, 2)))
    with pytest.raises(ValueError):
        check_unitary(np.eye(2), dim=4)
    with pytest.raises(ValueError):
        check_permutation((0, 0, 1), 3)
    assert check_permutation([2, 0, 1], 3) == (2, 0, 1)
    with pytest.raises(ValueError):
        check_probabilities([0.5, 0.6])
    with pytest.raises(ValueError):
        check_probabilities([1.2, -0.2])
