"""Finite-horizon observability Gramian of the closed-loop matrix."""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .errors import ModelError, NumericalError

# block exponentials are only formed for h*||B|| below this
_BASE_NORM = 0.5


@dataclass(frozen=True, eq=False)
class GramianValue:
    t: float
    S_t: np.ndarray


def _van_loan(B, S, h):
    r = B.shape[0]
    M = np.block([[-B.T, S], [np.zeros((r, r)), B]])
    E = sp.expm(M, h)
    return E[r:, r:], E[r:, r:].T @ E[:r, r:]


def gramian_with_exp(B, S, t):
    """``(S_t, exp(tB))`` from one block exponential plus doublings.

    The block exponential of ``[[-B', S], [0, B]]`` is evaluated at a
    base step ``h = t / 2**k`` small enough that the anti-stable block
    stays bounded, then doubled with ``S_2h = S_h + exp(hB') S_h exp(hB)``.
    Every doubling adds a PSD term, so no cancellation occurs for large t.
    """
    B = np.asarray(B, dtype=float)
    S = np.asarray(S, dtype=float)
    t = float(t)
    if not math.isfinite(t):
        raise NumericalError(f"non-finite time {t!r}", stage="gramian")
    if t < 0:
        raise ModelError(f"gramian time must be nonnegative, got {t}")
    r = B.shape[0]
    if t == 0.0:
        return np.zeros((r, r)), np.eye(r)
    nb = sp.spectral_norm(B)
    k = max(0, math.ceil(math.log2(t * nb / _BASE_NORM))) if nb > 0 else 0
    h = t / 2.0**k
    eh, G = _van_loan(B, S, h)
    for _ in range(k):
        G = G + eh.T @ G @ eh
        eh = eh @ eh
    return sp.sym(G), eh


def gramian_at(B, S, t):
    """``S_t = int_0^t exp(sB') S exp(sB) ds``."""
    G, _ = gramian_with_exp(B, S, t)
    return GramianValue(float(t), G)


class GramianStepper:
    """Advance ``(S_t, exp(tB))`` along a sorted grid.

    ``S_{t+d} = S_t + exp(tB') S_d exp(tB)``; increments are cached by
    step length so uniform grids cost one block exponential in total.
    """

    def __init__(self, B, S):
        self.B = np.asarray(B, dtype=float)
        self.S = np.asarray(S, dtype=float)
        r = self.B.shape[0]
        self.t = 0.0
        self.S_t = np.zeros((r, r))
        self.exp_tB = np.eye(r)
        self._cache = {}

    def advance(self, t):
        t = float(t)
        d = t - self.t
        if d < 0:
            raise ModelError("grid must be sorted")
        if d > 0:
            key = round(d, 12)
            if key not in self._cache:
                self._cache[key] = gramian_with_exp(self.B, self.S, d)
            S_d, e_d = self._cache[key]
            e = self.exp_tB
            self.S_t = sp.sym(self.S_t + e.T @ S_d @ e)
            self.exp_tB = e @ e_d
            self.t = t
        return self.S_t, self.exp_tB


def gramian_curve(B, S, grid):
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size and (np.any(np.diff(grid) < 0) or grid[0] < 0):
        raise ModelError("grid must be sorted and nonnegative")
    stepper = GramianStepper(B, S)
    return [GramianValue(float(t), stepper.advance(t)[0].copy()) for t in grid]


def mono_tol(S_inf):
    return 1e-9 * sp.spectral_norm(S_inf)
