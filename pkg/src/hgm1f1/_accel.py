"""Switch between numba-compiled kernels and the plain numpy fallbacks.

Set ``HGM_DISABLE_NUMBA=1`` in the environment before import to force the
numpy path (useful for debugging and for the kernel benchmark).
"""
import os

_off = os.environ.get("HGM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _off:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

USE_NUMBA = HAVE_NUMBA


def backend():
    return "numba" if USE_NUMBA else "numpy"
