"""Optional numba acceleration.

``HYLTL_DISABLE_NUMBA=1`` (or numba missing) selects the pure-numpy
kernels instead.
"""

from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

ENV_FLAG = "HYLTL_DISABLE_NUMBA"


def numba_enabled() -> bool:
    return numba is not None and os.environ.get(ENV_FLAG, "").strip() not in ("1", "true", "yes")


def njit(fn):
    """``numba.njit(cache=True)`` when numba is importable, else identity."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)
