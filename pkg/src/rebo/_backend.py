"""Kernel backend selection.

The compiled extension is preferred; set ``REBO_PURE_PYTHON=1`` to force the
pure-Python kernels.
"""
import os

from . import _pykernels

if os.environ.get("REBO_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

LIFTOFF = _pykernels.LIFTOFF
DEATH = _pykernels.DEATH
TIMEOUT = _pykernels.TIMEOUT

__all__ = ["kernels", "BACKEND", "LIFTOFF", "DEATH", "TIMEOUT"]
