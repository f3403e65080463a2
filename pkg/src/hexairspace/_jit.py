"""Numba switch shared by every kernel module.

Set ``HEXAIRSPACE_DISABLE_NUMBA=1`` before import to run the pure
Python/numpy fallback kernels instead of the compiled ones.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

_flag = os.environ.get("HEXAIRSPACE_DISABLE_NUMBA", "").strip().lower()
NUMBA_ENABLED = numba is not None and _flag in ("", "0", "false", "no")


def njit(*args, **kws):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if not NUMBA_ENABLED:
        if len(args) == 1 and callable(args[0]) and not kws:
            return args[0]
        return lambda f: f
    kws.setdefault("cache", True)
    return numba.njit(*args, **kws)
