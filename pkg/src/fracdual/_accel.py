"""Backend selection for the hot kernels.

Set ``FRACDUAL_NUMBA=0`` to force the pure-numpy kernels even when numba is
importable.  The choice is made once, at import time.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None


def _env_enabled() -> bool:
    flag = os.environ.get("FRACDUAL_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = numba is not None and _env_enabled()


def njit(func):
    """Compile ``func`` with numba in nopython mode, or return None when unavailable."""
    if numba is None:
        return None
    return numba.njit(cache=True, nogil=True, fastmath=False)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
