"""Closed forms for models with ``S > 0`` and ``SA = A'S >= 0``.

Under these conditions the similarity ``X -> S^{1/2} X S^{-1/2}`` turns
the drift into a symmetric problem, so the fixed points, the Gramian and
the transition matrix all have explicit expressions in
``(A^2 + RS)^{1/2}``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import spectral as sp
from .errors import ModelError, NumericalError
from .model import check_initial_condition, riccati_drift

FIXED_POINT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CommutingModel:
    model: object
    accepted: bool
    witnesses: dict = field(default_factory=dict)

    def require(self):
        if not self.accepted:
            raise ModelError(f"model is not in the commuting class: {self.witnesses}")
        return self


def commuting_check(model, sym_tol=sp.SYM_TOL, psd_tol=sp.PSD_TOL):
    SA = model.S @ model.A
    lmin_S = sp.lambda_min(model.S)
    asym = sp.asymmetry(SA)
    lmin_SA = sp.lambda_min(SA)
    ok_S = lmin_S > psd_tol * max(sp.spectral_norm(model.S), 1.0)
    ok_sym = asym <= sym_tol * (1.0 + sp.spectral_norm(SA))
    ok_psd = lmin_SA >= -psd_tol * max(sp.spectral_norm(SA), 1.0)
    witnesses = {
        "lambda_min_S": lmin_S,
        "SA_asymmetry": asym,
        "lambda_min_SA": lmin_SA,
        "S_positive_definite": bool(ok_S),
        "SA_symmetric": bool(ok_sym),
        "SA_psd": bool(ok_psd),
    }
    return CommutingModel(model, bool(ok_S and ok_sym and ok_psd), witnesses)


def _right_solve_S(X, cho):
    """``X S^{-1}`` using a Cholesky factor of S."""
    return sla.cho_solve(cho, X.T).T


def _half_powers(S):
    w, V = np.linalg.eigh(S)
    root = (V * np.sqrt(w)) @ V.T
    inv_root = (V / np.sqrt(w)) @ V.T
    return sp.sym(root), sp.sym(inv_root)


def root_A2_RS(cm):
    """``(A^2 + RS)^{1/2}`` with spectrum in the open right half-plane.

    Built as ``S^{-1/2} [S^{1/2} (A S^{-1} A' + R) S^{1/2}]^{1/2} S^{1/2}``;
    ``A S^{-1} A' = A^2 S^{-1}`` in this class and is symmetric.
    """
    m = cm.require().model
    cho = sla.cho_factor(m.S)
    Sh, Sih = _half_powers(m.S)
    inner = m.A @ sla.cho_solve(cho, m.A.T) + m.R
    sym_root = sp.sqrt_psd(sp.sym(Sh @ inner @ Sh))
    return Sih @ sym_root @ Sh


def closed_fixed_points(cm):
    """``(P_inf, P_inf_minus, B)`` from ``[A +/- (A^2 + RS)^{1/2}] S^{-1}``."""
    m = cm.require().model
    cho = sla.cho_factor(m.S)
    root = root_A2_RS(cm)
    P = sp.sym(_right_solve_S(m.A + root, cho))
    Pm = sp.sym(_right_solve_S(m.A - root, cho))
    B = -root
    scale = sp.spectral_norm(m.R)
    for name, X in (("P_inf", P), ("P_inf_minus", Pm)):
        res = sp.spectral_norm(riccati_drift(m, X))
        if res > FIXED_POINT_TOL * max(scale, 1e-300):
            raise NumericalError(f"closed-form {name} residual {res:.3g}", stage="special_case")
    return P, Pm, B


def closed_transition(cm, Q, t):
    """``E_t(Q) = e^{tB} D [e^{2tB} D + (Q - P_minus)(I - e^{2tB'})]^{-1}``.

    ``D = P_inf - P_minus``. The transpose in the last factor matters: the
    version with ``I - e^{2tB}`` there is only correct when S and B
    commute (e.g. A, R, S sharing an eigenbasis).
    """
    m = cm.require().model
    Q = check_initial_condition(Q, m.dim)
    P, Pm, B = closed_fixed_points(cm)
    D = P - Pm
    e1 = sp.expm(B, t)
    e2 = e1 @ e1
    bracket = e2 @ D + (Q - Pm) @ (np.eye(m.dim) - e2.T)
    if np.linalg.cond(bracket) * np.finfo(float).eps > 1e-2:
        raise NumericalError("closed-form bracket numerically singular", stage="special_case")
    # X bracket^{-1} = solve(bracket', X')'
    return np.linalg.solve(bracket.T, (e1 @ D).T).T


def closed_gramian(cm, t):
    """``S_t = -1/2 S B^{-1} (I - e^{2tB})``.

    Equivalently ``-1/2 (I - e^{2tB'}) B'^{-1} S``, since ``SB`` is symmetric.
    """
    m = cm.require().model
    _, _, B = closed_fixed_points(cm)
    e2 = sp.expm(B, 2.0 * t)
    return sp.sym(-0.5 * m.S @ np.linalg.solve(B, np.eye(m.dim) - e2))


def structural_identities(cm, tol=FIXED_POINT_TOL):
    """Residuals of ``P_inf - P_minus = -2 B S^{-1}`` and ``B = -(P_inf - P_minus) S / 2``."""
    m = cm.require().model
    P, Pm, B = closed_fixed_points(cm)
    cho = sla.cho_factor(m.S)
    D = P - Pm
    res_gap = sp.spectral_norm(D + 2.0 * _right_solve_S(B, cho))
    res_B = sp.spectral_norm(B + 0.5 * D @ m.S)
    return {
        "gap_identity": res_gap,
        "gap_identity_passed": res_gap <= tol * max(sp.spectral_norm(D), 1.0),
        "B_identity": res_B,
        "B_identity_passed": res_B <= tol * max(sp.spectral_norm(B), 1.0),
    }


def transformed_identity(cm, P_inf=None):
    """Residual of ``S^{1/2} P S^{1/2} = Abar + (Abar^2 + Rbar)^{1/2}``.

    ``Abar = S^{1/2} A S^{-1/2}`` (symmetric here) and
    ``Rbar = S^{1/2} R S^{1/2}``. *P_inf* defaults to the closed form;
    pass the general solver's result to cross-check it.
    """
    m = cm.require().model
    if P_inf is None:
        P_inf = closed_fixed_points(cm)[0]
    Sh, Sih = _half_powers(m.S)
    Abar = sp.sym(Sh @ m.A @ Sih)
    Rbar = sp.sym(Sh @ m.R @ Sh)
    Pbar = Sh @ P_inf @ Sh
    return sp.spectral_norm(Pbar - Abar - sp.sqrt_psd(sp.sym(Abar @ Abar + Rbar)))
