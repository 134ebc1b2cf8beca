"""Optional numba acceleration with a pure-numpy fallback.

The O(n^2) pair sweeps (A1 integral, chord-arc scan, polyline
intersection) dominate run time.  When numba is importable and the
environment variable CRESTWAVE_NO_NUMBA is unset, loop kernels are
compiled with @njit; otherwise vectorized numpy twins are used.  Both
paths use a fixed summation order so that repeated runs on the same
backend are bit-identical.
"""

import os
import warnings

_DISABLED = bool(os.environ.get("CRESTWAVE_NO_NUMBA", ""))

if not _DISABLED:
    try:
        from numba import njit as _njit
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - environment without numba
        _njit = None
        NUMBA_ENABLED = False
        warnings.warn("numba not importable; falling back to numpy kernels")
else:
    _njit = None
    NUMBA_ENABLED = False


def maybe_jit(func):
    """Compile func with numba when enabled, else return None.

    Callers keep the compiled object next to the numpy twin and pick
    at call time.  No parallel=True and no fastmath: determinism is
    worth more here than the last factor of two.
    """
    if NUMBA_ENABLED:
        return _njit(cache=True)(func)
    return None


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
