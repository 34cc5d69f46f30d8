"""Invariant suite: closed form vs. oracle, semigroup laws, identities, envelopes.

Each check returns a scalar discrepancy; :func:`run_case` bundles them with
their tolerances so the CLI and the acceptance tests share one code path.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from . import floquet, oracle
from . import spectral as sp
from .bounds import verify_envelopes
from .gramian import gramian_at, mono_tol
from .model import riccati_drift
from .steady_state import inverse_spd, steady_state

T_POINTS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
ENVELOPE_GRID = tuple(0.01 * 2.0**k for k in range(12))
SEMIGROUP_PAIRS = ((0.3, 0.3), (0.3, 1.7), (1.7, 0.3), (1.7, 1.7))

TOLERANCES = {
    "floquet_vs_oracle": 1e-6,
    "ode_residual": 1e-4,
    "semigroup": 1e-9,
    "implicit_solution": 1e-6,
    "frechet": 1e-4,
    "care_residual": 1e-9,
    "gramian_limit": 1e-8,
}


def envelope_grid(t_max=20.0):
    return np.array([t for t in ENVELOPE_GRID if t <= t_max])


def rel_err(X, Y):
    return sp.spectral_norm(X - Y) / (1.0 + sp.spectral_norm(Y))


def floquet_vs_oracle(steady, Q, ts=T_POINTS, config=oracle.DEFAULT_CONFIG):
    """Largest relative gaps in ``E_t(Q)`` and ``phi_t(Q)`` over *ts*."""
    traj = oracle.integrate_riccati(steady.model, Q, ts, config, with_transition=True)
    dE = dphi = 0.0
    for k, t in enumerate(traj.grid):
        f = floquet.c_matrix(steady, Q, t)
        dE = max(dE, rel_err(traj.transitions[k], f.E))
        dphi = max(dphi, rel_err(traj.values[k], floquet.flow_from_factor(steady, f)))
    return dE, dphi


def ode_residual(steady, Q, ts=T_POINTS, h=1e-5):
    """``||dE/dt - (A - phi_t S) E|| / ||E||`` with a central difference."""
    A, S = steady.model.A, steady.model.S
    worst = 0.0
    for t in ts:
        dE = (floquet.transition(steady, Q, t + h) - floquet.transition(steady, Q, t - h)) / (2 * h)
        f = floquet.c_matrix(steady, Q, t)
        rhs = (A - floquet.flow_from_factor(steady, f) @ S) @ f.E
        worst = max(worst, sp.spectral_norm(dE - rhs) / sp.spectral_norm(f.E))
    return worst


def semigroup_laws(steady, Q, pairs=SEMIGROUP_PAIRS):
    """Gaps in the shift laws ``E_{s,s+t}(Q) = E_t(phi_s(Q))`` and
    ``phi_{s+t}(Q) = phi_t(phi_s(Q))``.

    The transition law is checked in its cocycle form
    ``E_{s+t}(Q) = E_{s,s+t}(Q) E_s(Q)``, which compares a one-shot
    closed-form evaluation against a product of two; ``E_s`` itself can
    be far too ill-conditioned to invert.
    """
    dE = dphi = 0.0
    for s, t in pairs:
        phi_s = floquet.flow(steady, Q, s)
        shifted = floquet.transition_two_time(steady, Q, s, s + t)
        product = shifted @ floquet.transition(steady, Q, s)
        dE = max(dE, rel_err(product, floquet.transition(steady, Q, s + t)))
        dE = max(dE, rel_err(shifted, floquet.transition(steady, phi_s, t)))
        dphi = max(dphi, rel_err(floquet.flow(steady, Q, s + t), floquet.flow(steady, phi_s, t)))
    return dE, dphi


def two_time_vs_oracle(steady, Q, pairs=SEMIGROUP_PAIRS, config=oracle.DEFAULT_CONFIG):
    worst = 0.0
    for s, t in pairs:
        ref = oracle.integrate_transition(steady.model, Q, s, s + t, config)
        worst = max(worst, rel_err(ref, floquet.transition_two_time(steady, Q, s, s + t)))
    return worst


def implicit_solution(steady, Q, t=2.0, epsrel=1e-9):
    """Relative gap between ``phi_t(Q)`` and its variation-of-constants form.

    ``E_t Q E_t' + int_0^t E_{s,t} (R + phi_s S phi_s) E_{s,t}' ds``
    """
    R, S = steady.model.R, steady.model.S

    def integrand(s):
        phi_s = floquet.flow(steady, Q, s)
        E_st = floquet.transition(steady, phi_s, t - s)
        return E_st @ (R + phi_s @ S @ phi_s) @ E_st.T

    integral, _ = quad_vec(integrand, 0.0, t, epsrel=epsrel, epsabs=0.0)
    E_t = floquet.transition(steady, Q, t)
    return rel_err(E_t @ Q @ E_t.T + integral, floquet.flow(steady, Q, t))


def frechet_consistency(steady, Q, H, t=1.0, h=1e-5):
    Q = np.asarray(Q, dtype=float)
    H = sp.sym(np.asarray(H, dtype=float))
    room = sp.lambda_min(Q) / (2 * h)
    if sp.spectral_norm(H) > room:
        H = H * (room / sp.spectral_norm(H))
    fd = (floquet.flow(steady, Q + h * H, t) - floquet.flow(steady, Q - h * H, t)) / (2 * h)
    exact = floquet.frechet_derivative(steady, Q, H, t)
    return sp.spectral_norm(fd - exact) / (1.0 + sp.spectral_norm(exact))


def fixed_point_checks(steady):
    m = steady.model
    scale = sp.spectral_norm(m.R)
    return {
        "care_residual": sp.spectral_norm(riccati_drift(m, steady.P_inf)) / scale,
        "care_minus_residual": sp.spectral_norm(riccati_drift(m, steady.P_inf_minus)) / scale,
        "spectral_abscissa_B": sp.spectral_abscissa(steady.B),
        "lambda_max_P_minus": sp.lambda_max(steady.P_inf_minus),
        "lambda_min_Sinv_minus_P": sp.lambda_min(inverse_spd(steady.S_inf) - steady.P_inf),
    }


def gramian_checks(steady, grid=None):
    """Worst Loewner-order violation on *grid* and the gap to ``S_inf`` at ``60/|abscissa(B)|``."""
    B, S = steady.B, steady.model.S
    grid = envelope_grid() if grid is None else np.asarray(grid, dtype=float)
    values = [gramian_at(B, S, t).S_t for t in grid]
    worst = math.inf
    for lo, hi in zip(values, values[1:]):
        worst = min(worst, sp.lambda_min(hi - lo))
    worst = min(worst, sp.lambda_min(steady.S_inf - values[-1]))
    t_far = 60.0 / abs(sp.spectral_abscissa(B))
    gap = sp.spectral_norm(gramian_at(B, S, t_far).S_t - steady.S_inf)
    return {
        "loewner_min_eig": worst,
        "mono_tol": mono_tol(steady.S_inf),
        "limit_gap": gap,
        "limit_time": t_far,
    }


@dataclass
class CaseResult:
    index: int
    dim: int
    metrics: dict = field(default_factory=dict)
    passed: dict = field(default_factory=dict)
    error: str = None

    @property
    def ok(self):
        return self.error is None and all(self.passed.values())


def run_case(index, model, Q, Q2=None, H=None, delta=0.5, config=oracle.DEFAULT_CONFIG,
             implicit=True):
    res = CaseResult(index, model.dim)
    try:
        st = steady_state(model)
        tol = TOLERANCES
        m, p = res.metrics, res.passed

        fp = fixed_point_checks(st)
        m.update(fp)
        p["fixed_points"] = (fp["care_residual"] <= tol["care_residual"]
                             and fp["care_minus_residual"] <= tol["care_residual"]
                             and fp["spectral_abscissa_B"] < 0 and fp["lambda_max_P_minus"] < 0
                             and fp["lambda_min_Sinv_minus_P"] > 0)

        m["oracle_E"], m["oracle_phi"] = floquet_vs_oracle(st, Q, config=config)
        m["oracle_two_time"] = two_time_vs_oracle(st, Q, config=config)
        p["floquet_vs_oracle"] = (max(m["oracle_E"], m["oracle_phi"], m["oracle_two_time"])
                                  <= tol["floquet_vs_oracle"])

        m["ode_residual"] = ode_residual(st, Q)
        p["ode_residual"] = m["ode_residual"] <= tol["ode_residual"]

        m["semigroup_E"], m["semigroup_phi"] = semigroup_laws(st, Q)
        p["semigroup"] = max(m["semigroup_E"], m["semigroup_phi"]) <= tol["semigroup"]

        if implicit:
            m["implicit_solution"] = implicit_solution(st, Q)
            p["implicit_solution"] = m["implicit_solution"] <= tol["implicit_solution"]

        if H is not None:
            m["frechet"] = frechet_consistency(st, Q, H)
            p["frechet"] = m["frechet"] <= tol["frechet"]

        g = gramian_checks(st)
        m.update({f"gramian_{k}": v for k, v in g.items()})
        p["gramian_monotone"] = g["loewner_min_eig"] >= -g["mono_tol"]
        p["gramian_limit"] = g["limit_gap"] <= tol["gramian_limit"]

        rep = verify_envelopes(st, Q, envelope_grid(), delta, Q2=Q2)
        m["envelopes"] = rep.summary()
        for name, s in rep.summary().items():
            p[f"envelope_{name}"] = s["failed"] == 0
    except Exception as exc:  # recorded per case; the sweep continues
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def run_suite(cases, workers=1, **kwargs):
    """Run :func:`run_case` over ``(model, Q, Q2, H)`` tuples, results in input order."""
    def one(item):
        i, (model, Q, Q2, H) = item
        return run_case(i, model, Q, Q2, H, **kwargs)

    items = list(enumerate(cases))
    if workers <= 1:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, items))
