"""Shared numerical kernels: norms, spectra, exponential, PSD square root."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ModelError, NumericalError

SYM_TOL = 1e-10
PSD_TOL = 1e-10


def _check_finite(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ModelError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NumericalError("non-finite matrix entries", stage="spectral")
    return M


def sym(M):
    """Symmetric part (M + M')/2."""
    return 0.5 * (M + M.T)


def spectral_norm(M):
    M = _check_finite(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def log_norm(M):
    """Logarithmic 2-norm: largest eigenvalue of the symmetric part."""
    M = _check_finite(M)
    return float(np.linalg.eigvalsh(sym(M))[-1])


def spectral_abscissa(M):
    M = _check_finite(M)
    try:
        ev = sla.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc), stage="spectral") from exc
    return float(np.max(ev.real))


def lambda_min(M):
    """Smallest eigenvalue of the symmetric part of M."""
    return float(np.linalg.eigvalsh(sym(np.asarray(M, dtype=float)))[0])


def lambda_max(M):
    return float(np.linalg.eigvalsh(sym(np.asarray(M, dtype=float)))[-1])


def asymmetry(M):
    """Largest entrywise |M - M'|."""
    M = np.asarray(M, dtype=float)
    return float(np.max(np.abs(M - M.T))) if M.size else 0.0


def is_symmetric(M, tol=SYM_TOL):
    return asymmetry(M) <= tol * (1.0 + spectral_norm(M))


def expm(M, t=1.0):
    """Matrix exponential of ``t*M``.

    Scaling and squaring with a diagonal Pade approximant whose degree
    is picked from the norm (Al-Mohy & Higham, via scipy).
    """
    M = _check_finite(M)
    if not np.isfinite(t):
        raise NumericalError(f"non-finite time {t!r}", stage="expm")
    with np.errstate(over="ignore", invalid="ignore"):
        out = sla.expm(t * M)
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            f"matrix exponential overflowed (t*||M|| = {abs(t) * spectral_norm(M):.3g})",
            stage="expm",
        )
    return out


def sqrt_psd(M, psd_tol=PSD_TOL):
    """Principal symmetric square root of a symmetric PSD matrix.

    Eigenvalues in ``(-psd_tol*||M||, 0)`` are clamped to zero; anything
    more negative, or an asymmetric input, raises :class:`ModelError`.
    """
    M = _check_finite(M)
    scale = spectral_norm(M)
    if not is_symmetric(M):
        raise ModelError(f"sqrt_psd: input not symmetric (asymmetry {asymmetry(M):.3g})")
    w, V = np.linalg.eigh(sym(M))
    if w.size and w[0] < -psd_tol * max(scale, 1.0):
        raise ModelError(f"sqrt_psd: input indefinite (lambda_min = {w[0]:.3g})")
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return sym(root)


@dataclass(frozen=True)
class SpectralSummary:
    spectral_norm: float
    log_norm: float
    spectral_abscissa: float
    min_eigenvalue_sym: float

    @classmethod
    def of(cls, M):
        return cls(
            spectral_norm=spectral_norm(M),
            log_norm=log_norm(M),
            spectral_abscissa=spectral_abscissa(M),
            min_eigenvalue_sym=lambda_min(M),
        )
