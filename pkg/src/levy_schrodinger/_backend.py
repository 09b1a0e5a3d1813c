"""Kernel backend selection.

Hot loops are written twice: a numba ``@njit`` version and a pure numpy
version.  ``LEVY_SCHRODINGER_BACKEND=numpy`` forces the fallback; the
default uses numba when it imports cleanly.
"""

from __future__ import annotations

import os

_requested = os.environ.get("LEVY_SCHRODINGER_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"LEVY_SCHRODINGER_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the environment
    HAVE_NUMBA = False

DEFAULT_BACKEND = "numba" if (HAVE_NUMBA and _requested == "numba") else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        from numba import njit as _njit

        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def resolve(backend: str | None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    backend = backend.lower()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
