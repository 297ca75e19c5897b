"""Optional numba acceleration.

Kernels are written once as plain Python/numpy loops and compiled with
``numba.njit`` when numba is importable and ``MFREGRET_DISABLE_NUMBA`` is not
set to a truthy value.  Callers that have a vectorised numpy path check
``NUMBA_ENABLED`` and pick it instead of running the uncompiled loops.
"""
import os

_flag = os.environ.get("MFREGRET_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

# numba probes TBB first and warns when the installed version is too old;
# the portable work-queue layer avoids the noise.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    if _disabled:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(*args, **kwargs):
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


if _numba is not None:
    prange = _numba.prange
else:
    prange = range


def set_threads(n):
    """Set the worker count used by parallel kernels (no-op without numba)."""
    if _numba is not None and n:
        _numba.set_num_threads(max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS)))
