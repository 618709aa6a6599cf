"""Kernel compilation switch.

Hot loops are written once, in plain Python over numpy arrays, and compiled
with ``numba.njit`` when numba is importable.  Set ``SIGNZERO_DISABLE_NUMBA=1``
to run the same source uncompiled (useful for debugging and for the parity
tests).  The flag is read at import time.
"""
from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag_disabled() -> bool:
    return os.environ.get("SIGNZERO_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and not _flag_disabled()


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True, nogil=True``, or an identity decorator.

    The returned object always exposes ``py_func`` so callers and tests can
    reach the uncompiled implementation regardless of the backend.
    """
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)

    def wrap(func):
        if USE_NUMBA:
            return _numba.njit(**kwargs)(func)
        func.py_func = func
        return func

    if len(args) == 1 and callable(args[0]):
        return wrap(args[0])
    return wrap


def backend() -> str:
    return "numba" if USE_NUMBA else "python"
