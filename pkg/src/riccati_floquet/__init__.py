"""Floquet-type factorization of matrix Riccati flows.

For ``dP/dt = A P + P A' + R - P S P`` with (A, R^{1/2}) controllable and
(A, S^{1/2}) observable, the transition matrix of ``A - phi_t(Q) S``
factors as ``E_t(Q) = exp(tB) C_t(Q)^{-1}`` with ``B = A - P_inf S`` and
``C_t(Q) = I + (Q - P_inf) S_t``. This package evaluates that
factorization, the fixed points and Gramians it needs, the contraction
constants it yields, and checks all of it against direct ODE integration.
"""

__version__ = "0.1.0"

from .errors import MissingInitialCondition, ModelError, NumericalError, RiccatiError
from .floquet import (
    FloquetFactor, Trajectory, c_matrix, flow, flow_difference, frechet_derivative,
    trajectory, transition, transition_difference, transition_two_time,
)
from .gramian import GramianValue, gramian_at, gramian_curve
from .model import ModelTriple, ValidationReport, load_model, riccati_drift, validate
from .steady_state import SteadyState, negative_fixed_point, solve_care, solve_lyapunov, steady_state

__all__ = [
    "FloquetFactor", "GramianValue", "MissingInitialCondition", "ModelError", "ModelTriple",
    "NumericalError", "RiccatiError", "SteadyState", "Trajectory", "ValidationReport",
    "c_matrix", "flow", "flow_difference", "frechet_derivative", "gramian_at", "gramian_curve",
    "load_model", "negative_fixed_point", "riccati_drift", "solve_care", "solve_lyapunov",
    "steady_state", "trajectory", "transition", "transition_difference", "transition_two_time",
    "validate",
]
