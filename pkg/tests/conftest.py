import numpy as np
import pytest

from riccati_floquet.model import ModelTriple
from riccati_floquet.randmodels import model_sweep
from riccati_floquet.steady_state import steady_state

# mpmath, 30 digits
TANH1 = 0.761594155955764888119
SECH1 = 0.648054273663885399575
S1 = 0.432332358381693654053  # (1 - e^-2) / 2
COSH1_COSH2 = 0.410154272004598385487
SECH1_SQ = 0.419974341614026069394
CHI_DELTA1 = 2.31303528549933130364


@pytest.fixture
def scalar():
    return ModelTriple([[0.0]], [[1.0]], [[1.0]])


@pytest.fixture
def scalar_ss(scalar):
    return steady_state(scalar)


@pytest.fixture
def identity2():
    return ModelTriple(np.zeros((2, 2)), np.eye(2), np.eye(2))


@pytest.fixture
def diag12():
    return ModelTriple(np.diag([1.0, 2.0]), np.eye(2), np.eye(2))


@pytest.fixture(scope="session")
def random_cases():
    """(model, steady, Q) for a fixed sweep of sizes 2..6."""
    out = []
    for model, Q in model_sweep(7, 10, range(2, 7)):
        out.append((model, steady_state(model), Q))
    return out


@pytest.fixture(params=["numba", "numpy"])
def kernel_mode(request, monkeypatch):
    if request.param == "numpy":
        monkeypatch.setenv("RICCATI_NO_NUMBA", "1")
    else:
        monkeypatch.delenv("RICCATI_NO_NUMBA", raising=False)
    return request.param


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
