"""Fixed points of the Riccati drift and the limiting Gramian."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import spectral as sp
from .errors import ModelError, NumericalError
from .model import ModelTriple, riccati_drift

CARE_TOL = 1e-9
LYAP_TOL = 1e-9
COND_WARN = 1e12


def _lyap(F, W):
    """Solve ``F X + X F' + W = 0`` (Bartels-Stewart)."""
    X = sla.solve_continuous_lyapunov(F, -W)
    return sp.sym(X)


def _newton_step(model, P):
    """One Newton defect correction for ``Lambda(P) = 0``."""
    closed = model.A - P @ model.S
    return sp.sym(P + _lyap(closed, riccati_drift(model, P)))


def _refine(model, P, tol):
    scale = max(sp.spectral_norm(model.R), np.finfo(float).tiny)
    res = sp.spectral_norm(riccati_drift(model, P))
    if res <= tol * scale:
        return P, res
    try:
        P_new = _newton_step(model, P)
    except (np.linalg.LinAlgError, ValueError):
        return P, res
    res_new = sp.spectral_norm(riccati_drift(model, P_new))
    if res_new < res:
        return P_new, res_new
    return P, res


def solve_care(model, care_tol=CARE_TOL):
    """Stabilizing solution of ``A P + P A' + R - P S P = 0``.

    Ordered real Schur form of the Hamiltonian ``[[A', -S], [-R, -A]]``;
    the stable invariant subspace ``[U1; U2]`` gives ``P = U2 U1^{-1}``.

    Returns
    -------
    P_inf, B : ndarray
        The fixed point and the closed-loop matrix ``B = A - P_inf S``.
    """
    A, R, S = model.A, model.R, model.S
    r = model.dim
    H = np.block([[A.T, -S], [-R, -A]])
    try:
        T, Z, n_stable = sla.schur(H, output="real", sort="lhp")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Schur decomposition failed: {exc}", stage="solve_care") from exc
    if n_stable != r:
        raise NumericalError(
            f"Hamiltonian has {n_stable} stable eigenvalues, expected {r} "
            "(controllability/observability violated?)",
            stage="solve_care",
        )
    U1, U2 = Z[:r, :r], Z[r:, :r]
    if np.linalg.cond(U1) > 1e14:
        raise NumericalError("stable subspace is not a graph (U1 singular)", stage="solve_care")
    P = sp.sym(np.linalg.solve(U1.T, U2.T).T)
    P, res = _refine(model, P, care_tol)
    if res > care_tol * sp.spectral_norm(R):
        raise NumericalError(f"CARE residual {res:.3g} above tolerance", stage="solve_care")
    B = A - P @ S
    if sp.spectral_abscissa(B) >= 0:
        raise NumericalError("closed-loop matrix is not Hurwitz", stage="solve_care")
    if sp.lambda_min(P) <= 0:
        raise NumericalError(f"P_inf not positive definite (lambda_min {sp.lambda_min(P):.3g})",
                             stage="solve_care")
    return P, B


def solve_lyapunov(B, S, lyap_tol=LYAP_TOL):
    """Solve ``X B + B' X + S = 0`` for Hurwitz ``B``; the result must be SPD."""
    B = np.asarray(B, dtype=float)
    S = np.asarray(S, dtype=float)
    if sp.spectral_abscissa(B) >= 0:
        raise NumericalError("B is not Hurwitz", stage="solve_lyapunov")
    try:
        X = _lyap(B.T, S)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(str(exc), stage="solve_lyapunov") from exc
    res = sp.spectral_norm(X @ B + B.T @ X + S)
    if res > lyap_tol * max(sp.spectral_norm(S), 1.0):
        raise NumericalError(f"Lyapunov residual {res:.3g} above tolerance", stage="solve_lyapunov")
    lmin = sp.lambda_min(X)
    if lmin <= 1e-12 * sp.spectral_norm(X):
        raise NumericalError(
            f"limiting Gramian not positive definite (lambda_min {lmin:.3g}); model unobservable?",
            stage="solve_lyapunov",
        )
    return X


def inverse_spd(M, stage="inverse_spd"):
    try:
        factor = sla.cho_factor(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix not positive definite", stage=stage) from exc
    return sp.sym(sla.cho_solve(factor, np.eye(M.shape[0])))


def negative_fixed_point(P_inf, S_inf, model=None, care_tol=CARE_TOL):
    """``P_inf - S_inf^{-1}``, the negative-definite root.

    When *model* is given the result gets the same Newton defect
    correction as the stabilizing root.
    """
    S_inf = np.asarray(S_inf, dtype=float)
    cond = np.linalg.cond(S_inf)
    if not np.isfinite(cond):
        raise NumericalError("S_inf is singular", stage="negative_fixed_point")
    if cond > COND_WARN:
        warnings.warn(f"S_inf is ill-conditioned (cond {cond:.2e})", RuntimeWarning, stacklevel=2)
    Pm = sp.sym(P_inf - inverse_spd(S_inf, stage="negative_fixed_point"))
    if model is not None:
        Pm, _ = _refine(model, Pm, care_tol)
    if sp.lambda_max(Pm) >= 0:
        raise NumericalError("P_inf_minus is not negative definite", stage="negative_fixed_point")
    return Pm


@dataclass(frozen=True, eq=False)
class SteadyState:
    model: ModelTriple
    P_inf: np.ndarray
    B: np.ndarray
    S_inf: np.ndarray
    P_inf_minus: np.ndarray

    @property
    def dim(self):
        return self.model.dim

    def residuals(self):
        m = self.model
        return {
            "care": sp.spectral_norm(riccati_drift(m, self.P_inf)),
            "care_minus": sp.spectral_norm(riccati_drift(m, self.P_inf_minus)),
            "lyapunov": sp.spectral_norm(self.S_inf @ self.B + self.B.T @ self.S_inf + m.S),
            "spectral_abscissa_B": sp.spectral_abscissa(self.B),
            "lambda_max_P_inf_minus": sp.lambda_max(self.P_inf_minus),
            "lambda_min_Sinv_minus_P": sp.lambda_min(
                inverse_spd(self.S_inf) - self.P_inf),
        }


def steady_state(model, care_tol=CARE_TOL, lyap_tol=LYAP_TOL):
    """Solve for ``P_inf``, ``B``, ``S_inf``, ``P_inf_minus`` and check them."""
    if not isinstance(model, ModelTriple):
        raise ModelError("steady_state expects a ModelTriple")
    P_inf, B = solve_care(model, care_tol)
    S_inf = solve_lyapunov(B, model.S, lyap_tol)
    Pm = negative_fixed_point(P_inf, S_inf, model, care_tol)
    st = SteadyState(model, P_inf, B, S_inf, Pm)
    res = st.residuals()
    scale_R = sp.spectral_norm(model.R)
    if res["care_minus"] > care_tol * scale_R:
        raise NumericalError(f"Lambda(P_inf_minus) residual {res['care_minus']:.3g}",
                             stage="steady_state")
    if res["lambda_min_Sinv_minus_P"] <= 0:
        raise NumericalError("Loewner order P_inf < S_inf^{-1} violated", stage="steady_state")
    for arr in (P_inf, B, S_inf, Pm):
        arr.flags.writeable = False
    return st
