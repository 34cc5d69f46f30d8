"""Seeded random models for verification sweeps."""

import os

import numpy as np

from .model import ModelTriple, validate

DEFAULT_SEED = 42
EPS = 0.1


def default_seed():
    return int(os.environ.get("RICCATI_SEED", DEFAULT_SEED))


def random_psd(rng, r, scale=1.0):
    W = rng.standard_normal((r, r))
    return scale * (W @ W.T) / r


def random_model(rng, r, max_tries=100):
    """A uniform in [-1, 1]; R = GG' + eps I; S = HH' + eps I.

    Resamples on validation failure.
    """
    for _ in range(max_tries):
        A = rng.uniform(-1.0, 1.0, (r, r))
        G = rng.standard_normal((r, r))
        H = rng.standard_normal((r, r))
        model = ModelTriple(A, G @ G.T + EPS * np.eye(r), H @ H.T + EPS * np.eye(r))
        if validate(model).passed:
            return model
    raise RuntimeError(f"could not draw a valid model of size {r}")


def random_diagonalizable_model(rng, r):
    """A, R, S diagonal in one random orthonormal basis; A >= 0, R, S > 0."""
    U = np.linalg.qr(rng.standard_normal((r, r)))[0]
    A = (U * rng.uniform(0.0, 2.0, r)) @ U.T
    R = (U * rng.uniform(EPS, 2.0, r)) @ U.T
    S = (U * rng.uniform(EPS, 2.0, r)) @ U.T
    return ModelTriple((A + A.T) / 2, (R + R.T) / 2, (S + S.T) / 2)


def random_commuting_model(rng, r):
    """S SPD, A = S^{-1/2} Abar S^{1/2} with Abar symmetric PSD, so SA = A'S >= 0.

    Unlike :func:`random_diagonalizable_model`, S and A need not commute.
    """
    H = rng.standard_normal((r, r))
    S = H @ H.T / r + EPS * np.eye(r)
    w, V = np.linalg.eigh(S)
    Sh = (V * np.sqrt(w)) @ V.T
    Sih = (V / np.sqrt(w)) @ V.T
    U = np.linalg.qr(rng.standard_normal((r, r)))[0]
    Abar = (U * rng.uniform(0.0, 2.0, r)) @ U.T
    A = Sih @ Abar @ Sh
    G = rng.standard_normal((r, r))
    R = G @ G.T / r + EPS * np.eye(r)
    return ModelTriple(A, R, S)


def model_sweep(seed, n, dims):
    """``n`` validated models with sizes cycling through *dims*."""
    rng = np.random.default_rng(seed)
    dims = list(dims)
    out = []
    for i in range(n):
        r = dims[i % len(dims)]
        model = random_model(rng, r)
        out.append((model, random_psd(rng, r)))
    return out
