"""Kernel backend selection.

Numba-compiled kernels are used when numba imports cleanly.  Setting the
environment variable ``GEOMREG_NUMBA=0`` (read once, at import time) forces
the pure-numpy path.
"""
import os

_FLAG = os.environ.get("GEOMREG_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("0", "false", "no", "off")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_REQUESTED and NUMBA_AVAILABLE


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
