"""Hot numeric kernels.

Two interchangeable implementations live here: ``_nb`` (numba ``@njit``)
and ``_np`` (vectorized numpy).  The active one is chosen once at import
time from the ``RPARALLEL_BACKEND`` environment variable (``numba`` or
``numpy``); when unset, numba is used if it imports.  Both backends expose
the same functions with the same contracts, so either can be handed to the
higher level modules explicitly through :func:`get_backend`.
"""

import os
import warnings

from . import _np

__all__ = [
    "BACKEND",
    "get_backend",
    "clip_curve",
    "grid_clip_curve",
    "simplex_distance",
    "row_crossings",
    "interpolate",
]

_ENV = "RPARALLEL_BACKEND"


def _load_numba():
    try:
        from . import _nb
    except ImportError:  # pragma: no cover - numba is a hard dependency here
        return None
    return _nb


def get_backend(name=None):
    """Return the kernel module for ``name`` ("numba" or "numpy")."""
    if name is None:
        name = BACKEND
    if name == "numpy":
        return _np
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return mod
    raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")


def _select():
    requested = os.environ.get(_ENV, "").strip().lower()
    if requested in ("", "numba"):
        if _load_numba() is not None:
            return "numba"
        if requested == "numba":
            warnings.warn("numba not importable; falling back to numpy kernels", RuntimeWarning)
        return "numpy"
    if requested == "numpy":
        return "numpy"
    raise ValueError(f"{_ENV}={requested!r} is not one of 'numba', 'numpy'")


BACKEND = _select()
_active = get_backend(BACKEND)

clip_curve = _active.clip_curve
grid_clip_curve = _active.grid_clip_curve
simplex_distance = _active.simplex_distance
row_crossings = _active.row_crossings
interpolate = _active.interpolate
