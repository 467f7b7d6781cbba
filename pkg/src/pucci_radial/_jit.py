"""Numba switch.

Kernels are written once in numba-compatible Python. When numba is missing,
or ``PUCCI_RADIAL_NUMBA=0`` is set in the environment before import, the
decorator is a no-op and the same source runs under CPython/numpy.
"""
import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _want_numba():
    flag = os.environ.get("PUCCI_RADIAL_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()

if USE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit

__all__ = ["USE_NUMBA", "njit"]
