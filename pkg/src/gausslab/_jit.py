"""Numba switch.

Hot kernels are written twice: an ``@njit`` loop version and a vectorized
numpy version. ``GAUSSLAB_NUMBA=0`` (or a missing numba install) selects the
numpy path. The flag is read at call time so tests and the benchmark can flip
it without re-importing.
"""

import os

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; workqueue needs no extra library
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrapper(f):
            return f

        return wrapper

    prange = range

_FALSE = {"0", "false", "no", "off"}


def use_numba() -> bool:
    if not HAVE_NUMBA:
        return False
    return os.environ.get("GAUSSLAB_NUMBA", "1").strip().lower() not in _FALSE


def backend_name() -> str:
    return "numba" if use_numba() else "numpy"


def _configure_threads():
    n = os.environ.get("GAUSSLAB_THREADS")
    if not n or not HAVE_NUMBA:
        return
    try:
        n = int(n)
    except ValueError:
        return
    n = max(1, min(n, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


_configure_threads()
