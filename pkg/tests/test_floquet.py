import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import COSH1_COSH2, S1, SECH1, SECH1_SQ, TANH1
from riccati_floquet import floquet
from riccati_floquet import spectral as sp
from riccati_floquet.errors import ModelError
from riccati_floquet.randmodels import random_model, random_psd
from riccati_floquet.steady_state import steady_state

ZERO = np.zeros((1, 1))


def test_scalar_factor(scalar_ss):
    f = floquet.c_matrix(scalar_ss, ZERO, 1.0)
    assert f.S_t[0, 0] == pytest.approx(S1, abs=1e-15)
    # C = 1 - S_1, C^{-1} = 1 / (1 - S_1)
    assert f.C[0, 0] == pytest.approx(1 - S1, abs=1e-15)
    assert f.C_inv[0, 0] == pytest.approx(1.76159415595576489, abs=1e-14)


def test_scalar_flow_and_transition(scalar_ss):
    assert floquet.flow(scalar_ss, ZERO, 1.0)[0, 0] == pytest.approx(TANH1, abs=1e-14)
    assert floquet.transition(scalar_ss, ZERO, 1.0)[0, 0] == pytest.approx(SECH1, abs=1e-14)


def test_scalar_two_time(scalar_ss):
    E = floquet.transition_two_time(scalar_ss, ZERO, 1.0, 2.0)
    assert E[0, 0] == pytest.approx(COSH1_COSH2, abs=1e-14)


def test_scalar_frechet(scalar_ss):
    d = floquet.frechet_derivative(scalar_ss, ZERO, np.eye(1), 1.0)
    assert d[0, 0] == pytest.approx(SECH1_SQ, abs=1e-14)


def test_scalar_difference(scalar_ss):
    # phi_1(0) - phi_1(1) = tanh(1) - 1
    d = floquet.flow_difference(scalar_ss, ZERO, np.eye(1), 1.0)
    assert d[0, 0] == pytest.approx(-0.238405844044235112, abs=1e-14)
    dE = floquet.transition_difference(scalar_ss, ZERO, np.eye(1), 1.0)
    assert dE[0, 0] == pytest.approx(SECH1 - math.exp(-1.0), abs=1e-14)


def test_fixed_point_is_stationary(diag12):
    ss = steady_state(diag12)
    for t in (0.3, 4.0):
        np.testing.assert_allclose(floquet.flow(ss, ss.P_inf, t), ss.P_inf, rtol=1e-13)
        np.testing.assert_allclose(floquet.transition(ss, ss.P_inf, t), sp.expm(ss.B, t),
                                   rtol=1e-12, atol=1e-300)


def test_time_zero_identity(identity2):
    ss = steady_state(identity2)
    Q = np.diag([0.3, 2.0])
    np.testing.assert_allclose(floquet.flow(ss, Q, 0.0), Q, atol=1e-15)
    np.testing.assert_array_equal(floquet.transition(ss, Q, 0.0), np.eye(2))


def test_input_errors(scalar_ss):
    with pytest.raises(ModelError):
        floquet.flow(scalar_ss, ZERO, -1.0)
    with pytest.raises(ModelError):
        floquet.transition_two_time(scalar_ss, ZERO, 2.0, 1.0)
    with pytest.raises(ModelError):
        floquet.frechet_derivative(scalar_ss, ZERO, np.eye(2), 1.0)
    with pytest.raises(ModelError):
        floquet.trajectory(scalar_ss, ZERO, [1.0, 0.5])


def test_trajectory_matches_pointwise(random_cases):
    model, ss, Q = random_cases[3]
    grid = np.linspace(0.0, 5.0, 23)
    traj = floquet.trajectory(ss, Q, grid, with_transition=True)
    for k, t in enumerate(grid):
        np.testing.assert_allclose(traj.values[k], floquet.flow(ss, Q, t), rtol=1e-11, atol=1e-12)
        np.testing.assert_allclose(traj.transitions[k], floquet.transition(ss, Q, t),
                                   rtol=1e-10, atol=1e-12)


def _case(r, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, r)
    return steady_state(m), random_psd(rng, r), random_psd(rng, r)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.05, 8.0))
def test_flow_stays_psd_and_symmetric(r, seed, t):
    ss, Q, _ = _case(r, seed)
    P = floquet.flow(ss, Q, t)
    np.testing.assert_array_equal(P, P.T)
    assert sp.lambda_min(P) >= -1e-10 * max(sp.spectral_norm(P), 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_semigroup(r, seed, s, t):
    ss, Q, _ = _case(r, seed)
    lhs = floquet.flow(ss, Q, s + t)
    rhs = floquet.flow(ss, floquet.flow(ss, Q, s), t)
    assert sp.spectral_norm(lhs - rhs) <= 1e-9 * (1 + sp.spectral_norm(lhs))
    E = floquet.transition(ss, Q, s + t)
    cocycle = floquet.transition_two_time(ss, Q, s, s + t) @ floquet.transition(ss, Q, s)
    assert sp.spectral_norm(E - cocycle) <= 1e-9 * (1 + sp.spectral_norm(E))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.05, 6.0))
def test_difference_identities(r, seed, t):
    ss, Q1, Q2 = _case(r, seed)
    direct = floquet.flow(ss, Q1, t) - floquet.flow(ss, Q2, t)
    assert sp.spectral_norm(floquet.flow_difference(ss, Q1, Q2, t) - direct) <= 1e-8 * (1 + sp.spectral_norm(direct))
    dE = floquet.transition(ss, Q1, t) - floquet.transition(ss, Q2, t)
    assert sp.spectral_norm(floquet.transition_difference(ss, Q1, Q2, t) - dE) <= 1e-8 * (1 + sp.spectral_norm(dE))


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_frechet_matches_finite_difference(r, seed):
    ss, Q, _ = _case(r, seed)
    rng = np.random.default_rng(seed + 1)
    G = rng.standard_normal((r, r))
    H = (G + G.T) / 2
    # keep Q +- hH inside the PSD cone
    Q = Q + np.eye(r)
    h = 1e-5 / max(sp.spectral_norm(H), 1e-300)
    fd = (floquet.flow(ss, Q + h * H, 1.0) - floquet.flow(ss, Q - h * H, 1.0)) / (2 * h)
    exact = floquet.frechet_derivative(ss, Q, H, 1.0)
    assert sp.spectral_norm(fd - exact) <= 1e-5 * (1 + sp.spectral_norm(exact))
