"""Kernel backend selection.

The compiled extension is preferred; set ``APTVDF_PURE_PYTHON=1`` to force the
numpy/pure-Python fallback.
"""
import os

from aptvdf import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("APTVDF_PURE_PYTHON"):
    try:
        from aptvdf import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

allpass_cascade = _impl.allpass_cascade
fixed_cascade = _impl.fixed_cascade

# int64 kernels are only safe when intermediate sums fit comfortably.
INT64_SAFE_BITS = 62
