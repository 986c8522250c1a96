"""Backend selection for the compiled kernels.

Set ``SCADENOISE_DISABLE_NUMBA=1`` to force the pure-numpy path. Numba is
also skipped silently if it cannot be imported.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_DISABLED = os.environ.get("SCADENOISE_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None

if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the system TBB is too old for numba; skip it instead of warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
BACKEND = "numba" if (HAVE_NUMBA and not NUMBA_DISABLED) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range
