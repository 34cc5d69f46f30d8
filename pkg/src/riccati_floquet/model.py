"""Problem data (A, R, S), validation, and the Riccati drift."""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .errors import MissingInitialCondition, ModelError


def _frozen(M):
    M = np.array(M, dtype=float)
    M.flags.writeable = False
    return M


@dataclass(frozen=True, eq=False)
class ModelTriple:
    """Coefficients of ``dP/dt = A P + P A' + R - P S P``."""

    A: np.ndarray
    R: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        mats = {}
        for name in ("A", "R", "S"):
            M = np.asarray(getattr(self, name), dtype=float)
            if M.ndim == 0:
                M = M.reshape(1, 1)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ModelError(f"{name} must be square, got shape {M.shape}")
            mats[name] = M
        shapes = {M.shape for M in mats.values()}
        if len(shapes) != 1:
            raise ModelError(f"dimension mismatch among A, R, S: {sorted(shapes)}")
        for name, M in mats.items():
            object.__setattr__(self, name, _frozen(M))

    @property
    def dim(self):
        return self.A.shape[0]

    def to_dict(self, Q=None):
        out = {"dim": self.dim, "A": self.A.tolist(), "R": self.R.tolist(), "S": self.S.tolist()}
        if Q is not None:
            out["Q"] = np.asarray(Q, dtype=float).tolist()
        return out

    def fingerprint(self, Q=None):
        canon = json.dumps(self.to_dict(Q), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def __repr__(self):
        return f"ModelTriple(r={self.dim})"


def _parse_matrix(name, rows, dim):
    if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
        raise ModelError(f"{name} must be an array of rows")
    if len(rows) != dim or any(len(row) != dim for row in rows):
        widths = sorted({len(row) for row in rows})
        raise ModelError(f"{name} must be {dim}x{dim}, got {len(rows)} rows of widths {widths}")
    try:
        return np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{name}: non-numeric entry ({exc})") from exc


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    missing = [k for k in ("dim", "A", "R", "S") if k not in doc]
    if missing:
        raise ModelError(f"missing field(s): {', '.join(missing)}")
    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ModelError(f"dim must be a positive integer, got {dim!r}")
    A, R, S = (_parse_matrix(k, doc[k], dim) for k in ("A", "R", "S"))
    Q = _parse_matrix("Q", doc["Q"], dim) if doc.get("Q") is not None else None
    return ModelTriple(A, R, S), Q


def load_model(source):
    """Parse a model from JSON text, a file path, or an already-decoded dict.

    Returns ``(model, Q)`` with ``Q`` ``None`` when absent. No validation
    beyond shapes is performed here; see :func:`validate`.
    """
    if isinstance(source, dict):
        return model_from_dict(source)
    text = source
    if isinstance(source, os.PathLike) or not str(source).lstrip().startswith("{"):
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ModelError(f"cannot read model file: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"parse error: {exc}") from exc
    return model_from_dict(doc)


def require_q(Q):
    if Q is None:
        raise MissingInitialCondition("this operation needs an initial condition Q")
    return Q


def kalman_rank(A, G):
    """Numerical rank of [G, AG, ..., A^{r-1} G].

    Each block is rescaled to the norm of G; the exact rank is unchanged
    but the relative threshold no longer drowns in ``||A||^{r-1}``.
    """
    r = A.shape[0]
    g = np.linalg.norm(G, 2)
    blocks = [G]
    for _ in range(r - 1):
        nxt = A @ blocks[-1]
        n = np.linalg.norm(nxt, 2)
        blocks.append(nxt * (g / n) if n > 0 else nxt)
    K = np.hstack(blocks)
    sv = np.linalg.svd(K, compute_uv=False)
    thresh = r * (sv[0] if sv.size else 0.0) * 1e-12
    return int(np.sum(sv > thresh))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple = field(default_factory=tuple)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "value": c.value, "detail": c.detail}
                for c in self.checks
            ],
        }


def _psd_checks(name, M, sym_tol, psd_tol):
    scale = sp.spectral_norm(M)
    asym = sp.asymmetry(M)
    lmin = sp.lambda_min(M)
    return [
        Check(f"{name}_symmetric", asym <= sym_tol * (1 + scale), asym, "max |M - M'|"),
        Check(f"{name}_psd", lmin >= -psd_tol * max(scale, 1.0), lmin, "lambda_min"),
    ]


def check_initial_condition(Q, dim, sym_tol=sp.SYM_TOL, psd_tol=sp.PSD_TOL):
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (dim, dim):
        raise ModelError(f"Q must be {dim}x{dim}, got {Q.shape}")
    bad = [c for c in _psd_checks("Q", Q, sym_tol, psd_tol) if not c.passed]
    if bad:
        raise ModelError("; ".join(f"{c.name} failed ({c.value:.3g})" for c in bad))
    return sp.sym(Q)


def validate(model, sym_tol=sp.SYM_TOL, psd_tol=sp.PSD_TOL):
    """Check symmetry, semi-definiteness, controllability and observability.

    Failures are reported as entries, never raised.
    """
    checks = _psd_checks("R", model.R, sym_tol, psd_tol) + _psd_checks("S", model.S, sym_tol, psd_tol)
    r = model.dim
    try:
        ctrb = kalman_rank(model.A, sp.sqrt_psd(model.R, psd_tol))
    except ModelError:
        ctrb = -1
    try:
        obsv = kalman_rank(model.A.T, sp.sqrt_psd(model.S, psd_tol))
    except ModelError:
        obsv = -1
    checks.append(Check("controllable", ctrb == r, float(ctrb), f"rank of Kalman matrix, need {r}"))
    checks.append(Check("observable", obsv == r, float(obsv), f"rank of Kalman matrix, need {r}"))
    return ValidationReport(tuple(checks))


def riccati_drift(model, P):
    """``A P + P A' + R - P S P``, symmetrized."""
    P = np.asarray(P, dtype=float)
    if P.shape != model.A.shape:
        raise ModelError(f"P must be {model.A.shape}, got {P.shape}")
    out = model.A @ P + P @ model.A.T + model.R - P @ model.S @ P
    return sp.sym(out)
