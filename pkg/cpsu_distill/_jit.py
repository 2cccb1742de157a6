"""Optional numba JIT with a pure-Python fallback."""

from __future__ import annotations

import functools
import warnings


class PerformanceWarning(UserWarning):
    pass


performance_warning = (
    "numba is not available, the simulator kernel runs without JIT compilation. "
    "Install the 'accel' extra for faster episodes."
)

try:
    from numba import njit

    jit = functools.partial(njit, cache=False)
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _warned = False

    def jit(func=None, **kwargs):
        def decorate(f):
            @functools.wraps(f)
            def wrapper(*args):
                global _warned
                if not _warned:
                    _warned = True
                    warnings.warn(performance_warning, PerformanceWarning)
                return f(*args)

            return wrapper

        if func is None:
            return decorate
        return decorate(func)


__all__ = ["jit", "HAVE_NUMBA", "PerformanceWarning"]
