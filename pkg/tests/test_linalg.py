import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entcesaro.linalg import (
    as_operator,
    as_vector,
    frobenius_norm,
    gaussian_operator,
    haar_unitary,
    operator_norm,
    require_unitary,
    unitarity_residual,
)


def test_operator_norm_matches_lapack_svd(rng):
    for d in (1, 2, 3, 5, 8):
        for _ in range(20):
            a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10, abs=1e-12)


def test_operator_norm_special_cases():
    assert operator_norm(np.zeros((3, 3))) == 0.0
    assert operator_norm(np.eye(4)) == pytest.approx(1.0, abs=1e-12)
    # rank one
    v = np.array([1.0, 2.0, 2.0])
    assert operator_norm(np.outer(v, v)) == pytest.approx(9.0, rel=1e-11)
    # degenerate top singular values
    assert operator_norm(np.diag([3.0, 3.0, 1.0])) == pytest.approx(3.0, rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10**6))
def test_operator_norm_random_property(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    assert operator_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-9, abs=1e-12)


def test_operator_norm_is_deterministic(rng):
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    assert operator_norm(a) == operator_norm(a.copy())


def test_as_operator_validation():
    with pytest.raises(ValueError):
        as_operator(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_operator(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        as_operator(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        as_operator(np.eye(3), dim=2)


def test_as_vector_validation():
    assert as_vector([1, 2]).dtype == np.complex128
    with pytest.raises(ValueError):
        as_vector([1, 2], dim=3)
    with pytest.raises(ValueError):
        as_vector([np.inf, 0])


def test_haar_unitary_is_unitary_and_seeded():
    u1 = haar_unitary(np.random.default_rng(5), 6)
    u2 = haar_unitary(np.random.default_rng(5), 6)
    assert np.array_equal(u1, u2)
    assert unitarity_residual(u1) <= 1e-12
    require_unitary(u1, 1e-10)


def test_require_unitary_rejects():
    with pytest.raises(ValueError):
        require_unitary(np.diag([1.0, 2.0]), 1e-10)


def test_gaussian_operator_norm_target(rng):
    a = gaussian_operator(rng, 5, op_norm=1.0)
    assert operator_norm(a) == pytest.approx(1.0, abs=1e-9)
    b = gaussian_operator(rng, 5, op_norm=2.5)
    assert operator_norm(b) == pytest.approx(2.5, abs=1e-9)


def test_frobenius_norm():
    assert frobenius_norm(np.array([[3.0, 0.0], [0.0, 4.0]])) == pytest.approx(5.0)
