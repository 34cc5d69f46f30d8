"""Independent check path: adaptive Runge-Kutta integration of the Riccati
flow and its transition matrix, plus the exact scalar solution.

Nothing here touches the closed-form machinery in :mod:`.floquet`.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._kernels import DP_A, DP_E, STATUS_MAXSTEPS, STATUS_UNDERFLOW, dopri_riccati
from .errors import ModelError, NumericalError, StepSizeUnderflow
from .floquet import Trajectory
from .model import check_initial_condition


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 2_000_000
    method: str = "dopri5(4)"

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 1e-13 <= v <= 1e-2:
                raise ModelError(f"{name} must lie in [1e-13, 1e-2], got {v}")
        if not self.max_step > 0:
            raise ModelError("max_step must be positive")


DEFAULT_CONFIG = IntegratorConfig()


def _run(model, P0, E0, t0, grid, config, with_E):
    kernel = _accel.pick(dopri_riccati)
    r = model.dim
    out = kernel(
        np.ascontiguousarray(model.A), np.ascontiguousarray(model.R),
        np.ascontiguousarray(model.S), np.ascontiguousarray(P0, dtype=float),
        np.ascontiguousarray(E0 if E0 is not None else np.eye(r), dtype=float),
        float(t0), np.ascontiguousarray(grid, dtype=float),
        float(config.rel_tol), float(config.abs_tol), float(config.max_step),
        int(config.max_steps), bool(with_E), DP_A, DP_E,
    )
    P_out, E_out, status, fail_t, _, _ = out
    if status == STATUS_UNDERFLOW:
        raise StepSizeUnderflow(fail_t)
    if status == STATUS_MAXSTEPS:
        raise NumericalError(f"step budget exhausted at t={fail_t:.6g}", stage="oracle")
    return P_out, E_out


def _grid(t_grid):
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if grid.ndim != 1 or np.any(np.diff(grid) < 0) or (grid.size and grid[0] < 0):
        raise ModelError("grid must be a sorted 1-d array of nonnegative times")
    if not np.all(np.isfinite(grid)):
        raise ModelError("grid must be finite")
    return grid


def integrate_riccati(model, Q, t_grid, config=DEFAULT_CONFIG, with_transition=False):
    """Integrate ``dP/dt = Lambda(P)`` from ``P(0) = Q`` onto *t_grid*.

    With ``with_transition`` the transition matrix ``E_t(Q)`` is carried
    in the same state vector and returned on the trajectory.
    """
    Q = check_initial_condition(Q, model.dim)
    grid = _grid(t_grid)
    P_out, E_out = _run(model, Q, None, 0.0, grid, config, with_transition)
    values = [np.array(P) for P in P_out]
    trans = [np.array(E) for E in E_out] if with_transition else None
    return Trajectory(grid, values, "oracle", trans)


def integrate_transition(model, Q, s, t, config=DEFAULT_CONFIG):
    """``E_{s,t}(Q)``: solve ``dE/du = (A - phi_u(Q) S) E`` from ``E_s = I``."""
    s, t = float(s), float(t)
    if not 0 <= s <= t:
        raise ModelError(f"need 0 <= s <= t, got s={s}, t={t}")
    Q = check_initial_condition(Q, model.dim)
    r = model.dim
    if s == t:
        return np.eye(r)
    P_s = Q
    if s > 0:
        P_out, _ = _run(model, Q, None, 0.0, np.array([s]), config, False)
        P_s = P_out[0]
    _, E_out = _run(model, P_s, np.eye(r), s, np.array([t]), config, True)
    return np.array(E_out[0])


def scalar_analytic(a, r, s, q, t):
    """Exact ``(phi_t(q), E_t(q))`` for the one-dimensional equation.

    ``p' = 2 a p + r - s p^2``. Accepts ``t = inf`` (the limit).
    """
    if s <= 0:
        raise ModelError("scalar_analytic needs s > 0")
    if r < 0 or q < 0:
        raise ModelError("scalar_analytic needs r >= 0 and q >= 0")
    root = math.sqrt(a * a + r * s)
    p_inf = (a + root) / s
    p_minus = (a - root) / s
    b = -root
    if math.isinf(t):
        return p_inf, 0.0
    e2 = math.exp(2 * b * t)
    gap = p_inf - p_minus
    denom = e2 * gap + (q - p_minus) * (1 - e2)
    E = math.exp(b * t) * gap / denom
    # phi - p_inf = E (q - p_inf) exp(bt)
    phi = p_inf + E * (q - p_inf) * math.exp(b * t)
    return phi, E
