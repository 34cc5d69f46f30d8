import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from riccati_floquet import spectral as sp
from riccati_floquet.errors import ModelError, NumericalError

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


def square(n_max=5):
    return st.integers(1, n_max).flatmap(lambda n: arrays(float, (n, n), elements=finite))


def expm_series(M, terms=80):
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


@pytest.mark.parametrize("M, expected", [
    (np.eye(2), 1.0),
    (np.diag([3.0, -4.0]), 4.0),
    # singular values of [[0,1],[0,0]] from M M' = diag(1, 0)
    (np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0),
])
def test_spectral_norm(M, expected):
    assert sp.spectral_norm(M) == pytest.approx(expected, abs=1e-15)


def test_spectral_norm_rejects_nan():
    with pytest.raises(NumericalError):
        sp.spectral_norm(np.array([[np.nan]]))


@pytest.mark.parametrize("M, mu, sigma", [
    (np.diag([-1.0, -2.0]), -1.0, -1.0),
    # symmetric part [[0, 1/2], [1/2, 0]] has eigenvalues +-1/2
    (np.array([[0.0, 1.0], [0.0, 0.0]]), 0.5, 0.0),
    (np.array([[0.0, -1.0], [1.0, 0.0]]), 0.0, 0.0),
])
def test_log_norm_and_abscissa(M, mu, sigma):
    assert sp.log_norm(M) == pytest.approx(mu, abs=1e-15)
    assert sp.spectral_abscissa(M) == pytest.approx(sigma, abs=1e-15)


def test_expm_examples():
    np.testing.assert_array_equal(sp.expm(np.zeros((3, 3)), 7.0), np.eye(3))
    np.testing.assert_allclose(sp.expm(np.diag([-1.0, -2.0]), 1.0),
                               np.diag([math.exp(-1), math.exp(-2)]), rtol=1e-15)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    expected = expm_series(rot * math.pi / 2)
    np.testing.assert_allclose(sp.expm(rot, math.pi / 2), expected, atol=1e-15)
    np.testing.assert_allclose(expected, rot, atol=1e-15)


def test_expm_overflow_reported():
    with pytest.raises(NumericalError, match="overflow"):
        sp.expm(np.array([[1.0]]), 1e4)


def test_sqrt_psd_examples():
    np.testing.assert_allclose(sp.sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(sp.sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    M = np.array([[2.0, 1.0], [1.0, 2.0]])
    root = sp.sqrt_psd(M)
    np.testing.assert_allclose(root @ root, M, atol=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(root), [1.0, math.sqrt(3)], atol=1e-14)


@pytest.mark.parametrize("M", [np.array([[1.0, 2.0], [0.0, 1.0]]), np.diag([1.0, -1.0])])
def test_sqrt_psd_rejects(M):
    with pytest.raises(ModelError):
        sp.sqrt_psd(M)


def test_sqrt_psd_clamps_roundoff():
    M = np.diag([1.0, -1e-14])
    root = sp.sqrt_psd(M)
    np.testing.assert_array_equal(np.diag(root), [1.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(square())
def test_abscissa_below_log_norm(M):
    assert sp.spectral_abscissa(M) <= sp.log_norm(M) + 1e-12 * (1 + sp.spectral_norm(M))
    s = sp.SpectralSummary.of(M)
    assert s.spectral_norm >= abs(s.spectral_abscissa) - 1e-12


@settings(max_examples=40, deadline=None)
@given(square(), st.floats(0, 1), st.floats(0, 1))
def test_expm_semigroup(M, s, t):
    lhs = sp.expm(M, s) @ sp.expm(M, t)
    rhs = sp.expm(M, s + t)
    assert sp.spectral_norm(lhs - rhs) <= 1e-10 * sp.spectral_norm(rhs)


@settings(max_examples=60, deadline=None)
@given(square())
def test_sqrt_psd_squares_back(W):
    M = W @ W.T
    root = sp.sqrt_psd(M)
    np.testing.assert_array_equal(root, root.T)
    assert sp.spectral_norm(root @ root - M) <= 1e-10 * max(sp.spectral_norm(M), 1.0)


@settings(max_examples=40, deadline=None)
@given(square())
def test_sqrt_psd_of_spd_is_spd(W):
    M = W @ W.T + np.eye(W.shape[0])
    assert np.linalg.eigvalsh(sp.sqrt_psd(M))[0] > 0
