"""Kernel backend selection.

The compiled extension is used when it imports; setting ``FEBERI_PURE_PYTHON=1``
forces the numpy fallback.
"""

import os

from . import _kernels_py

FORCE_ENV = "FEBERI_PURE_PYTHON"

try:
    if os.environ.get(FORCE_ENV, "").strip() not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impls = {"python": _kernels_py}
if _compiled is not None:
    _impls["cython"] = _compiled


def available() -> list:
    return sorted(_impls)


def couple_steps_for(name: str | None = None):
    """``couple_steps`` of the named backend (default: the selected one)."""
    name = BACKEND if name is None else name
    if name not in _impls:
        raise ValueError(f"backend {name!r} unavailable; have {available()}")
    return _impls[name].couple_steps
