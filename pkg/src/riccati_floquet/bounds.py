"""Explicit contraction constants and envelope checks against trajectories."""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import spectral as sp
from .errors import ModelError, NumericalError
from .floquet import c_matrix, flow_from_factor, transition_difference
from .gramian import gramian_at
from .steady_state import inverse_spd

CHECK_TOL = 1e-9
IDENTITY_TOL = 1e-8


def chi(steady, Q):
    """``||P_minus||^{-1} (||P_inf - P_minus|| + ||Q - P_inf||)``.

    This is the constant as usually quoted. It uses the *largest*
    eigenvalue of ``-P_minus`` and is not a valid bound on
    ``sup_t ||C_t(Q)^{-1}||`` in general; see :func:`chi_proven`.
    """
    Q = np.asarray(Q, dtype=float)
    Pm = steady.P_inf_minus
    num = sp.spectral_norm(steady.P_inf - Pm) + sp.spectral_norm(Q - steady.P_inf)
    return num / sp.spectral_norm(Pm)


def chi_proven(steady, Q):
    """Same numerator as :func:`chi`, divided by ``lambda_min(-P_minus)``.

    This is the constant the two-branch estimate on ``||C_t(Q)^{-1}||``
    actually delivers after letting the split time go to infinity. It
    coincides with :func:`chi` when ``P_minus`` is a multiple of I.
    """
    Q = np.asarray(Q, dtype=float)
    Pm = steady.P_inf_minus
    num = sp.spectral_norm(steady.P_inf - Pm) + sp.spectral_norm(Q - steady.P_inf)
    return num / sp.lambda_min(-Pm)


def _delta(delta):
    delta = float(delta)
    if not delta > 0 or not np.isfinite(delta):
        raise ModelError(f"delta must be positive and finite, got {delta}")
    return delta


def chi_delta(steady, delta, S_delta=None):
    """``[lambda_min(S_delta) lambda_min(-P_minus)]^{-1}``."""
    delta = _delta(delta)
    if S_delta is None:
        S_delta = gramian_at(steady.B, steady.model.S, delta).S_t
    return 1.0 / (sp.lambda_min(S_delta) * sp.lambda_min(-steady.P_inf_minus))


def lemma_bound(steady, Q, t, delta, S_delta=None, S_inf_inv=None):
    """Upper bound on ``||C_t(Q)^{-1}||`` from the branch that applies at t.

    For ``t >= delta``:
    ``1 / (lambda_min(S_delta) lambda_min(S_t^{-1} - S_inf^{-1} - P_minus))``;
    for ``t <= delta``:
    ``1 + ||Q - P_inf|| / lambda_min(S_delta^{-1} - S_inf^{-1} - P_minus)``.
    At ``t == delta`` both apply and the smaller is returned.
    """
    delta = _delta(delta)
    Q = np.asarray(Q, dtype=float)
    S = steady.model.S
    if S_delta is None:
        S_delta = gramian_at(steady.B, S, delta).S_t
    if S_inf_inv is None:
        S_inf_inv = inverse_spd(steady.S_inf)
    Pm = steady.P_inf_minus
    bounds = []
    if t >= delta:
        S_t_inv = inverse_spd(gramian_at(steady.B, S, t).S_t, stage="lemma_bound")
        bounds.append(1.0 / (sp.lambda_min(S_delta) * sp.lambda_min(S_t_inv - S_inf_inv - Pm)))
    if t <= delta:
        S_d_inv = inverse_spd(S_delta, stage="lemma_bound")
        bounds.append(1.0 + sp.spectral_norm(Q - steady.P_inf) / sp.lambda_min(S_d_inv - S_inf_inv - Pm))
    return min(bounds)


@dataclass(frozen=True)
class Envelope:
    """``||exp(tB)|| <= alpha exp(-beta t)``."""

    alpha: float
    beta: float
    kind: str

    def __call__(self, t):
        return self.alpha * np.exp(-self.beta * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CoppelEnvelope:
    a: float
    gamma: float
    coppel: Envelope
    log_norm: Envelope = None

    @property
    def selected(self):
        # smaller area under the envelope wins
        cands = [e for e in (self.coppel, self.log_norm) if e is not None]
        return min(cands, key=lambda e: e.alpha / e.beta)

    @property
    def alpha(self):
        return self.selected.alpha

    @property
    def beta(self):
        return self.selected.beta

    def __call__(self, t):
        return self.selected(t)


def coppel_envelope(B, gamma=0.5):
    B = np.asarray(B, dtype=float)
    if not 0.0 < gamma < 1.0:
        raise ModelError(f"gamma must lie in (0, 1), got {gamma}")
    abscissa = sp.spectral_abscissa(B)
    if abscissa >= 0:
        raise NumericalError("B is not Hurwitz", stage="coppel_envelope")
    r = B.shape[0]
    a = 2.0 * sp.spectral_norm(B) / abs(abscissa)
    coppel = Envelope((a / gamma) ** (r - 1), -(1.0 - gamma) * abscissa, "coppel")
    mu = sp.log_norm(B)
    log_env = Envelope(1.0, -mu, "log_norm") if mu < 0 else None
    return CoppelEnvelope(a, gamma, coppel, log_env)


@dataclass(frozen=True)
class ContractionConstants:
    chi_phi_delta: float
    chi_E_delta: float
    chi_phi_pair: float
    chi_E_pair: float


def contraction_constants(steady, delta, Q1, Q2):
    cd = chi_delta(steady, delta)
    s_norm = sp.spectral_norm(steady.S_inf)
    pair = chi(steady, Q1) * chi(steady, Q2)
    return ContractionConstants(cd**2, s_norm * cd**2, pair, s_norm * pair)


@dataclass(frozen=True)
class EnvelopeCheck:
    name: str
    t: float
    observed: float
    bound: float
    passed: bool


@dataclass
class BoundsReport:
    delta: float
    chi_Q: float
    chi_Q_proven: float
    chi_delta: float
    coppel_alpha: float
    coppel_beta: float
    coppel_gamma: float
    coppel_a: float
    envelope_kind: str
    chi_phi_delta: float = None
    chi_E_delta: float = None
    chi_phi_pair: float = None
    chi_E_pair: float = None
    trajectory_lambda_min: float = None
    trajectory_lambda_max: float = None
    envelope_checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.envelope_checks)

    def failures(self):
        return [c for c in self.envelope_checks if not c.passed]

    def summary(self):
        names = sorted({c.name for c in self.envelope_checks})
        out = {}
        for name in names:
            cs = [c for c in self.envelope_checks if c.name == name]
            out[name] = {
                "n": len(cs),
                "failed": sum(not c.passed for c in cs),
                "max_ratio": max((c.observed / c.bound if c.bound > 0 else 0.0) for c in cs),
            }
        return out

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _record(checks, name, t, observed, bound, tol):
    checks.append(EnvelopeCheck(name, float(t), float(observed), float(bound),
                                bool(observed <= bound * (1.0 + tol))))


def verify_envelopes(steady, Q, t_grid, delta, Q2=None, gamma=0.5, check_tol=CHECK_TOL):
    """Evaluate every envelope inequality on *t_grid* and record the outcome.

    Check names: ``E_chi_Q``, ``E_chi_delta``, ``C_inv_lemma``,
    ``exp_envelope``, and with *Q2* also ``phi_lip_pair``, ``E_lip_pair``,
    ``phi_lip_delta``, ``E_lip_delta``, ``phi_diff_identity``,
    ``E_diff_identity``. Violations are recorded, never raised.
    """
    delta = _delta(delta)
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size == 0 or np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ModelError("t_grid must be nonempty, sorted and nonnegative")
    S = steady.model.S
    S_delta = gramian_at(steady.B, S, delta).S_t
    S_inf_inv = inverse_spd(steady.S_inf)
    env = coppel_envelope(steady.B, gamma)
    chi_q = chi(steady, Q)
    chi_d = chi_delta(steady, delta, S_delta)
    report = BoundsReport(
        delta=delta, chi_Q=chi_q, chi_Q_proven=chi_proven(steady, Q), chi_delta=chi_d,
        coppel_alpha=env.alpha, coppel_beta=env.beta, coppel_gamma=gamma, coppel_a=env.a,
        envelope_kind=env.selected.kind,
    )
    if Q2 is not None:
        cc = contraction_constants(steady, delta, Q, Q2)
        report.chi_phi_delta, report.chi_E_delta = cc.chi_phi_delta, cc.chi_E_delta
        report.chi_phi_pair, report.chi_E_pair = cc.chi_phi_pair, cc.chi_E_pair
        dq = sp.spectral_norm(np.asarray(Q, dtype=float) - np.asarray(Q2, dtype=float))
    checks = report.envelope_checks
    lmins, lmaxs = [], []
    for t in grid:
        f = c_matrix(steady, Q, t)
        nexp = sp.spectral_norm(f.exp_tB)
        nE = sp.spectral_norm(f.E)
        _record(checks, "exp_envelope", t, nexp, env.selected(t), check_tol)
        _record(checks, "E_chi_Q", t, nE, chi_q * nexp, check_tol)
        if t >= delta:
            _record(checks, "E_chi_delta", t, nE, chi_d * nexp, check_tol)
            phi = flow_from_factor(steady, f)
            w = np.linalg.eigvalsh(phi)
            lmins.append(w[0])
            lmaxs.append(w[-1])
        _record(checks, "C_inv_lemma", t, sp.spectral_norm(f.C_inv),
                lemma_bound(steady, Q, t, delta, S_delta, S_inf_inv), check_tol)
        if Q2 is None:
            continue
        f2 = c_matrix(steady, Q2, t)
        F1, F2 = f.E, f2.E
        d_phi = F1 @ (f.Q - f2.Q) @ F2.T
        d_E = transition_difference(steady, Q, Q2, t)
        direct_phi = flow_from_factor(steady, f) - flow_from_factor(steady, f2)
        direct_E = F1 - F2
        scale_phi = 1.0 + sp.spectral_norm(direct_phi)
        scale_E = 1.0 + sp.spectral_norm(direct_E)
        _record(checks, "phi_diff_identity", t, sp.spectral_norm(d_phi - direct_phi),
                IDENTITY_TOL * scale_phi, 0.0)
        _record(checks, "E_diff_identity", t, sp.spectral_norm(d_E - direct_E),
                IDENTITY_TOL * scale_E, 0.0)
        n_dphi, n_dE = sp.spectral_norm(direct_phi), sp.spectral_norm(direct_E)
        _record(checks, "phi_lip_pair", t, n_dphi, cc.chi_phi_pair * nexp**2 * dq, check_tol)
        _record(checks, "E_lip_pair", t, n_dE, cc.chi_E_pair * nexp * dq, check_tol)
        if t >= delta:
            _record(checks, "phi_lip_delta", t, n_dphi, cc.chi_phi_delta * nexp**2 * dq, check_tol)
            _record(checks, "E_lip_delta", t, n_dE, cc.chi_E_delta * nexp * dq, check_tol)
    if lmins:
        report.trajectory_lambda_min = float(min(lmins))
        report.trajectory_lambda_max = float(max(lmaxs))
    return report


@dataclass(frozen=True)
class GrowthFit:
    c: float
    ratios: tuple
    margins: tuple


def quadratic_growth_check(steady, pairs):
    """Smallest c with ``max(chi_phi, chi_E) <= c (1 + ||Q1||^2 + ||Q2||^2)`` on *pairs*."""
    pairs = list(pairs)
    if not pairs:
        raise ModelError("quadratic_growth_check needs at least one pair")
    s_norm = sp.spectral_norm(steady.S_inf)
    ratios = []
    for Q1, Q2 in pairs:
        pair = chi(steady, Q1) * chi(steady, Q2)
        value = max(pair, s_norm * pair)
        denom = 1.0 + sp.spectral_norm(Q1) ** 2 + sp.spectral_norm(Q2) ** 2
        ratios.append(value / denom)
    c = max(ratios)
    margins = tuple(c - q for q in ratios)
    return GrowthFit(c, tuple(ratios), margins)
