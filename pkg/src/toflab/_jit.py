"""Optional numba acceleration.

Kernels are written as plain Python over numpy arrays and decorated with
:func:`njit`. Set ``TOFLAB_DISABLE_NUMBA=1`` (or uninstall numba) to run the
undecorated functions instead. A compiled kernel keeps its Python source
reachable as ``kernel.py_func``; :func:`python_impl` returns it either way.
"""

from __future__ import annotations

import os

_DISABLED = os.environ.get("TOFLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(func):
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)


def python_impl(func):
    return getattr(func, "py_func", func)
