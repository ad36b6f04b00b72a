"""Backend selection for the hot kernels.

Set ``OVERCODE_BACKEND=numpy`` to force the pure-numpy path even when numba
is importable. Any other value (or unset) uses numba when available.
"""

import os

BACKEND_ENV = "OVERCODE_BACKEND"


def _want_numba():
    return os.environ.get(BACKEND_ENV, "numba").strip().lower() != "numpy"


try:
    if not _want_numba():
        raise ImportError("numba disabled via " + BACKEND_ENV)
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend_name():
    return "numba" if HAS_NUMBA else "numpy"
