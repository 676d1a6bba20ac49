"""Numba acceleration switch.

Hot numeric kernels ship in two versions: numba ``@njit`` scalar loops and a
vectorized pure-numpy fallback.  The numba path is used when numba imports
cleanly and ``TANDEMFILM_NO_NUMBA`` is not set; otherwise the numpy path is
selected.  Both paths produce identical results (asserted in the test suite)
and ``benchmarks/bench_tmm.py`` compares their speed.
"""

import os


def _env_disabled() -> bool:
    return os.environ.get("TANDEMFILM_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """No-op stand-in so kernel modules stay importable without numba."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap

    def prange(*args):
        return range(*args)


NUMBA_ENABLED = HAVE_NUMBA and not _env_disabled()


def backend_name() -> str:
    """Name of the kernel backend selected at import time."""
    return "numba" if NUMBA_ENABLED else "numpy"
