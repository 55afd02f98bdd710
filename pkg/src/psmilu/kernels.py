"""Kernel backend selection.

The hot loops (one factorization level and the triangular solves) exist
twice: a Cython extension built at install time and a pure-Python fallback
with identical semantics.  The compiled module is preferred when importable;
set ``PSMILU_KERNEL=python`` (or ``cython``) to force a backend.
"""

import os

from . import _kernel_py

_FORCED = os.environ.get("PSMILU_KERNEL", "auto").strip().lower()

_cy = None
if _FORCED in ("auto", "cython"):
    try:
        from . import _kernel_cy as _cy
    except ImportError:
        _cy = None
        if _FORCED == "cython":
            raise ImportError(
                "PSMILU_KERNEL=cython but the compiled kernel is not built")

COUNTER_NAMES = _kernel_py.COUNTER_NAMES


def available_backends():
    names = ["python"]
    if _cy is not None:
        names.insert(0, "cython")
    return names


def active_backend():
    """Name of the backend used by default in this process."""
    return "cython" if _cy is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name in (None, "auto"):
        return _cy if _cy is not None else _kernel_py
    if name == "python":
        return _kernel_py
    if name == "cython":
        if _cy is None:
            raise ImportError("compiled kernel not available")
        return _cy
    raise ValueError(f"unknown kernel backend {name!r}")
