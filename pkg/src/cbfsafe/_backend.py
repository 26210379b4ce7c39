"""Kernel backend selection.

``CBFSAFE_BACKEND=numpy`` forces the pure-numpy kernels; anything else (or
unset) uses numba when it imports, numpy otherwise.
"""
import os

_requested = os.environ.get("CBFSAFE_BACKEND", "numba").strip().lower()

if _requested == "numpy":
    from . import _kernels_numpy as kernels
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as kernels
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        from . import _kernels_numpy as kernels
        BACKEND = "numpy"

__all__ = ["BACKEND", "kernels"]
