"""Floquet-type factorization ``E_t(Q) = exp(tB) C_t(Q)^{-1}`` and the flow."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import spectral as sp
from .errors import ModelError, NumericalError
from .gramian import GramianStepper, gramian_with_exp
from .model import check_initial_condition


@dataclass(frozen=True, eq=False)
class FloquetFactor:
    t: float
    Q: np.ndarray
    exp_tB: np.ndarray
    S_t: np.ndarray
    C: np.ndarray
    C_inv: np.ndarray
    cond_C: float

    @property
    def E(self):
        return self.exp_tB @ self.C_inv


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: np.ndarray
    values: list
    method: str
    transitions: list = None


def _check_time(t):
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ModelError(f"time must be finite and nonnegative, got {t}")
    return t


def _inverse(C):
    """LU inverse with one step of iterative refinement.

    Returns the inverse and a 1-norm condition estimate (LAPACK gecon).
    """
    r = C.shape[0]
    I = np.eye(r)
    if not np.all(np.isfinite(C)):
        raise NumericalError("C_t(Q) has non-finite entries", stage="floquet")
    lu = sla.lu_factor(C, check_finite=False)
    rcond, info = sla.lapack.dgecon(lu[0], np.linalg.norm(C, 1), norm="1")
    if info != 0 or rcond * 1e-2 < np.finfo(float).eps:
        raise NumericalError(f"C_t(Q) numerically singular (rcond {rcond:.3g})", stage="floquet")
    cond = 1.0 / rcond
    X = sla.lu_solve(lu, I, check_finite=False)
    X = X + sla.lu_solve(lu, I - C @ X, check_finite=False)
    return X, cond


def _factor(steady, Q, t, S_t, exp_tB):
    C = np.eye(steady.dim) + (Q - steady.P_inf) @ S_t
    C_inv, cond = _inverse(C)
    return FloquetFactor(t, Q, exp_tB, S_t, C, C_inv, cond)


def c_matrix(steady, Q, t):
    """``C_t(Q) = I + (Q - P_inf) S_t`` with its inverse."""
    Q = check_initial_condition(Q, steady.dim)
    t = _check_time(t)
    S_t, exp_tB = gramian_with_exp(steady.B, steady.model.S, t)
    return _factor(steady, Q, t, S_t, exp_tB)


def transition(steady, Q, t):
    """State transition matrix ``E_t(Q)`` of ``dE/dt = (A - phi_t(Q) S) E``."""
    return c_matrix(steady, Q, t).E


def _clamp_psd(P, stage, psd_tol=sp.PSD_TOL):
    P = sp.sym(P)
    w, V = np.linalg.eigh(P)
    if w[0] >= 0:
        return P
    if w[0] < -psd_tol * max(abs(w[-1]), 1.0):
        raise NumericalError(f"flow left the PSD cone (lambda_min {w[0]:.3g})", stage=stage)
    return sp.sym((V * np.clip(w, 0.0, None)) @ V.T)


def flow_from_factor(steady, f):
    D = f.Q - steady.P_inf
    P = steady.P_inf + f.exp_tB @ f.C_inv @ D @ f.exp_tB.T
    return _clamp_psd(P, stage="flow")


def flow(steady, Q, t):
    """Riccati flow ``phi_t(Q)`` in closed form.

    ``P_inf + exp(tB) [I + (Q - P_inf) S_t]^{-1} (Q - P_inf) exp(tB')``
    """
    return flow_from_factor(steady, c_matrix(steady, Q, t))


def transition_two_time(steady, Q, s, t):
    """``E_{s,t}(Q) = E_{t-s}(phi_s(Q))`` for ``0 <= s <= t``."""
    s, t = _check_time(s), _check_time(t)
    if s > t:
        raise ModelError(f"need s <= t, got s={s}, t={t}")
    if s == t:
        return np.eye(steady.dim)
    return transition(steady, flow(steady, Q, s), t - s)


def flow_difference(steady, Q1, Q2, t):
    """``phi_t(Q1) - phi_t(Q2)`` as a product of Floquet factors."""
    f1, f2 = c_matrix(steady, Q1, t), c_matrix(steady, Q2, t)
    F1 = f1.exp_tB @ f1.C_inv
    F2 = f2.exp_tB @ f2.C_inv
    return F1 @ (f1.Q - f2.Q) @ F2.T


def transition_difference(steady, Q1, Q2, t):
    """``E_t(Q1) - E_t(Q2) = exp(tB) C_1^{-1} (Q2 - Q1) S_t C_2^{-1}``."""
    f1, f2 = c_matrix(steady, Q1, t), c_matrix(steady, Q2, t)
    return f1.exp_tB @ f1.C_inv @ (f2.Q - f1.Q) @ f1.S_t @ f2.C_inv


def frechet_derivative(steady, Q, H, t):
    """Directional derivative of ``phi_t`` at Q along symmetric H."""
    H = np.asarray(H, dtype=float)
    if H.shape != (steady.dim, steady.dim) or not sp.is_symmetric(H):
        raise ModelError("H must be a symmetric matrix of the model dimension")
    E = transition(steady, Q, t)
    return sp.sym(E @ H @ E.T)


def trajectory(steady, Q, grid, with_transition=False):
    """Closed-form flow (and optionally ``E_t``) on a sorted grid."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size and (np.any(np.diff(grid) < 0) or grid[0] < 0):
        raise ModelError("grid must be sorted and nonnegative")
    Q = check_initial_condition(Q, steady.dim)
    stepper = GramianStepper(steady.B, steady.model.S)
    values, trans = [], []
    for t in grid:
        f = _factor(steady, Q, float(t), *stepper.advance(t))
        values.append(flow_from_factor(steady, f))
        if with_transition:
            trans.append(f.E)
    return Trajectory(grid, values, "closed-form", trans if with_transition else None)
