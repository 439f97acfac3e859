"""Numba availability and backend selection.

The hot kernels in :mod:`tophough.kernels` exist twice: a loop version compiled
with ``numba.njit`` and a vectorised numpy version.  The numpy path is used when
numba is missing or when ``TOPHOUGH_DISABLE_NUMBA`` (or numba's own
``NUMBA_DISABLE_JIT``) is set to a truthy value.
"""
from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSY


try:
    if _flag("TOPHOUGH_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"):
        raise ImportError
    import numba

    NUMBA_AVAILABLE = True

    def njit(func):
        return numba.njit(cache=True, nogil=True)(func)

except ImportError:
    NUMBA_AVAILABLE = False

    def njit(func):
        return func


_use_numba = NUMBA_AVAILABLE


def use_numba() -> bool:
    """Whether the numba kernels are currently selected."""
    return _use_numba


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` kernels at runtime (tests, benchmarks)."""
    global _use_numba
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is disabled or missing")
        _use_numba = True
    elif name == "numpy":
        _use_numba = False
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend() -> str:
    return "numba" if _use_numba else "numpy"
