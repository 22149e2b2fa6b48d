"""Kernel backend selection.

Hot inner loops (Gillespie event loop, per-edge pair sweeps, the scalar
ensemble solver) are compiled with numba when available.  Setting the
environment variable ``SISPAIR_BACKEND=numpy`` forces the uncompiled
fallback path; ``SISPAIR_BACKEND=numba`` fails loudly if numba is missing.
The fallback runs the identical code as plain Python/numpy, so it is slow
but bit-compatible at small scale (both paths drive the same MT19937
uniform stream).
"""

import os

_requested = os.environ.get("SISPAIR_BACKEND", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"SISPAIR_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    BACKEND = "numpy"
else:
    try:
        import numba  # noqa: F401
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        BACKEND = "numpy"


def jit(func):
    """Compile *func* with numba when the numba backend is active."""
    if BACKEND == "numba":
        import numba
        return numba.njit(cache=True)(func)
    return func
