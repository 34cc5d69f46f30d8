import math

import numpy as np
import pytest

from conftest import SECH1, TANH1
from riccati_floquet import oracle
from riccati_floquet.errors import ModelError, NumericalError
from riccati_floquet.randmodels import random_model, random_psd

ZERO = np.zeros((1, 1))


def test_config_validation():
    for bad in (1e-14, 0.1):
        with pytest.raises(ModelError):
            oracle.IntegratorConfig(rel_tol=bad)
    with pytest.raises(ModelError):
        oracle.IntegratorConfig(max_step=0.0)


def test_scalar_analytic_values():
    phi, E = oracle.scalar_analytic(0.0, 1.0, 1.0, 0.0, 1.0)
    assert phi == pytest.approx(TANH1, abs=1e-15)
    assert E == pytest.approx(SECH1, abs=1e-15)
    assert oracle.scalar_analytic(0.0, 1.0, 1.0, 0.0, math.inf) == (1.0, 0.0)
    with pytest.raises(ModelError):
        oracle.scalar_analytic(0.0, 1.0, 0.0, 0.0, 1.0)


def test_scalar_integration(scalar, kernel_mode):
    traj = oracle.integrate_riccati(scalar, ZERO, [0.0, 1.0], with_transition=True)
    assert traj.method == "oracle"
    assert traj.values[0][0, 0] == 0.0
    assert traj.values[1][0, 0] == pytest.approx(TANH1, abs=1e-10)
    assert traj.transitions[1][0, 0] == pytest.approx(SECH1, abs=1e-10)


@pytest.mark.parametrize("a, r, s, q", [(0.7, 0.2, 1.5, 3.0), (-1.2, 2.0, 0.3, 0.0)])
def test_scalar_against_analytic(a, r, s, q):
    from riccati_floquet.model import ModelTriple
    m = ModelTriple([[a]], [[r]], [[s]])
    ts = [0.1, 1.0, 5.0]
    traj = oracle.integrate_riccati(m, [[q]], ts, with_transition=True)
    for k, t in enumerate(ts):
        phi, E = oracle.scalar_analytic(a, r, s, q, t)
        assert traj.values[k][0, 0] == pytest.approx(phi, rel=1e-9)
        assert traj.transitions[k][0, 0] == pytest.approx(E, rel=1e-9)


def test_two_time(scalar):
    E = oracle.integrate_transition(scalar, ZERO, 1.0, 2.0)
    assert E[0, 0] == pytest.approx(math.cosh(1.0) / math.cosh(2.0), abs=1e-10)


def test_step_budget(scalar):
    cfg = oracle.IntegratorConfig(max_steps=3)
    with pytest.raises(NumericalError):
        oracle.integrate_riccati(scalar, ZERO, [10.0], cfg)


def test_bad_grid(scalar):
    with pytest.raises(ModelError):
        oracle.integrate_riccati(scalar, ZERO, [1.0, 0.5])


def test_numba_and_numpy_paths_agree(monkeypatch):
    rng = np.random.default_rng(3)
    m = random_model(rng, 4)
    Q = random_psd(rng, 4)
    grid = [0.5, 2.0]
    monkeypatch.delenv("RICCATI_NO_NUMBA", raising=False)
    a = oracle.integrate_riccati(m, Q, grid, with_transition=True)
    monkeypatch.setenv("RICCATI_NO_NUMBA", "1")
    b = oracle.integrate_riccati(m, Q, grid, with_transition=True)
    for x, y in zip(a.values + a.transitions, b.values + b.transitions):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-14)
