"""Optional numba acceleration.

Hot kernels are written once in a numba-compatible subset of Python and
compiled with ``njit`` when numba is importable and the environment variable
``MAGICDEPTH_DISABLE_NUMBA`` is unset (or ``0``).  Each kernel module also
ships a vectorized numpy path; :data:`USE_NUMBA` selects between them.
"""
import os

_flag = os.environ.get("MAGICDEPTH_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f

USE_NUMBA = HAVE_NUMBA


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
