import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CHI_DELTA1
from riccati_floquet import bounds, floquet
from riccati_floquet import spectral as sp
from riccati_floquet.errors import ModelError, NumericalError
from riccati_floquet.randmodels import random_model, random_psd
from riccati_floquet.steady_state import steady_state

ZERO = np.zeros((1, 1))
GRID = np.array([0.01 * 2.0**k for k in range(12)])


def test_scalar_constants(scalar_ss):
    # (||1 - (-1)|| + ||0 - 1||) / 1
    assert bounds.chi(scalar_ss, ZERO) == pytest.approx(3.0, abs=1e-14)
    assert bounds.chi_proven(scalar_ss, ZERO) == pytest.approx(3.0, abs=1e-14)
    assert bounds.chi_delta(scalar_ss, 1.0) == pytest.approx(CHI_DELTA1, abs=1e-13)
    cc = bounds.contraction_constants(scalar_ss, 1.0, ZERO, np.eye(1))
    assert cc.chi_phi_delta == pytest.approx(5.35013223196497307, abs=1e-12)
    assert cc.chi_E_delta == pytest.approx(2.67506611598248654, abs=1e-12)


def test_scalar_envelope(scalar_ss):
    env = bounds.coppel_envelope(scalar_ss.B)
    # log-norm envelope exp(-t) is exact here and beats Coppel
    assert env.selected.kind == "log_norm"
    assert env.alpha == pytest.approx(1.0)
    assert env.beta == pytest.approx(1.0)
    assert env(2.0) == pytest.approx(math.exp(-2.0))


def test_coppel_for_non_normal_B():
    B = np.array([[-1.0, 10.0], [0.0, -2.0]])
    env = bounds.coppel_envelope(B, gamma=0.5)
    assert env.log_norm is None
    assert env.selected.kind == "coppel"
    for t in GRID:
        assert sp.spectral_norm(sp.expm(B, t)) <= env(t)


def test_envelope_input_errors():
    with pytest.raises(ModelError):
        bounds.coppel_envelope(-np.eye(2), gamma=1.0)
    with pytest.raises(NumericalError):
        bounds.coppel_envelope(np.eye(2))


def test_delta_must_be_positive(scalar_ss):
    with pytest.raises(ModelError):
        bounds.chi_delta(scalar_ss, 0.0)


def test_lemma_branches_at_delta(scalar_ss):
    b = bounds.lemma_bound(scalar_ss, ZERO, 0.5, 0.5)
    lo = bounds.lemma_bound(scalar_ss, ZERO, 0.5 - 1e-12, 0.5)
    hi = bounds.lemma_bound(scalar_ss, ZERO, 0.5 + 1e-12, 0.5)
    assert b == pytest.approx(min(lo, hi), rel=1e-9)


def test_stated_chi_is_not_a_bound():
    """Seeded r = 2 model where sup_t ||C_t(Q)^{-1}|| exceeds the stated chi(Q)."""
    rng = np.random.default_rng(7)
    m = random_model(rng, 2)
    Q = random_psd(rng, 2)
    ss = steady_state(m)
    worst = max(sp.spectral_norm(floquet.c_matrix(ss, Q, t).C_inv)
                for t in np.geomspace(0.01, 20, 200))
    assert worst > 6.0 * bounds.chi(ss, Q)
    assert worst <= bounds.chi_proven(ss, Q)


def test_report_on_scalar(scalar_ss):
    rep = bounds.verify_envelopes(scalar_ss, ZERO, GRID, 0.5, Q2=np.eye(1))
    assert rep.passed, rep.failures()
    names = set(rep.summary())
    assert {"exp_envelope", "E_chi_Q", "E_chi_delta", "C_inv_lemma", "phi_diff_identity",
            "E_diff_identity", "phi_lip_pair", "E_lip_pair", "phi_lip_delta",
            "E_lip_delta"} == names
    d = rep.to_dict()
    assert d["passed"] is True
    assert 0 <= d["trajectory_lambda_min"] <= d["trajectory_lambda_max"] <= 1


def test_report_rejects_bad_grid(scalar_ss):
    with pytest.raises(ModelError):
        bounds.verify_envelopes(scalar_ss, ZERO, [1.0, 0.5], 0.5)


def test_quadratic_growth(scalar_ss):
    pairs = [(ZERO, np.eye(1) * k) for k in (0.5, 1.0, 4.0)]
    fit = bounds.quadratic_growth_check(scalar_ss, pairs)
    assert all(m >= 0 for m in fit.margins)
    assert fit.c == max(fit.ratios)
    with pytest.raises(ModelError):
        bounds.quadratic_growth_check(scalar_ss, [])


def _case(r, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, r)
    return steady_state(m), random_psd(rng, r), random_psd(rng, r)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_proven_chi_bounds_C_inverse(r, seed):
    ss, Q, _ = _case(r, seed)
    c = bounds.chi_proven(ss, Q)
    assert bounds.chi(ss, Q) <= c * (1 + 1e-12)
    for t in GRID:
        f = floquet.c_matrix(ss, Q, t)
        assert sp.spectral_norm(f.C_inv) <= c * (1 + 1e-9)
        assert sp.spectral_norm(f.E) <= c * sp.spectral_norm(f.exp_tB) * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.floats(0.1, 2.0))
def test_lemma_and_chi_delta(r, seed, delta):
    ss, Q, _ = _case(r, seed)
    cd = bounds.chi_delta(ss, delta)
    for t in GRID:
        f = floquet.c_matrix(ss, Q, t)
        assert sp.spectral_norm(f.C_inv) <= bounds.lemma_bound(ss, Q, t, delta) * (1 + 1e-9)
        if t >= delta:
            assert sp.spectral_norm(f.E) <= cd * sp.spectral_norm(f.exp_tB) * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_selected_envelope_dominates(r, seed):
    ss, _, _ = _case(r, seed)
    env = bounds.coppel_envelope(ss.B)
    for t in GRID:
        assert sp.spectral_norm(sp.expm(ss.B, t)) <= env(t) * (1 + 1e-9)
