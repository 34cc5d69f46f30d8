"""Optional numba acceleration.

Kernels are written in the subset of numpy that numba compiles, then
passed through :func:`jit`. Setting ``RICCATI_NO_NUMBA=1`` (or running
without numba installed) returns the plain Python function instead, so
both paths execute the same source.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def numba_enabled():
    flag = os.environ.get("RICCATI_NO_NUMBA", "").strip().lower()
    return numba is not None and flag in ("", "0", "false", "no")


def jit(func):
    """Return ``(compiled, python)`` variants of *func*.

    ``compiled`` is ``None`` when numba is unavailable.
    """
    if numba is None:
        return None, func
    return numba.njit(cache=True, nogil=True)(func), func


def pick(pair):
    compiled, python = pair
    if compiled is not None and numba_enabled():
        return compiled
    return python
