"""Optional numba acceleration.

Set ``SYMPSENS_DISABLE_NUMBA=1`` to run every kernel as plain numpy code.
The flag is read once, at import time.
"""

import os

_DISABLED = os.environ.get("SYMPSENS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba
except ImportError:
    numba = None

NUMBA_ENABLED = numba is not None


def maybe_njit(func):
    """Compile ``func`` with ``numba.njit`` when numba is enabled, else return it unchanged."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)
