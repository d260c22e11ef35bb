"""Optional numba acceleration.

Set ``SRBM_NUMBA=0`` in the environment to force the pure-numpy code paths.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
    # TBB in this environment is too old and numba warns on every first parallel call
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - numba is a hard dep in practice
    numba = None
    HAVE_NUMBA = False


def numba_enabled():
    flag = os.environ.get("SRBM_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)
