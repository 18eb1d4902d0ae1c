"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Set ``SOTRACK_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from sotrack import _pykernels

python_backend = _pykernels

try:
    if os.environ.get("SOTRACK_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend forced by environment")
    from sotrack import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

iou_matrix = _active.iou_matrix
max_iou = _active.max_iou
lbp_counts = _active.lbp_counts
bilinear_sample = _active.bilinear_sample


def available_backends() -> dict:
    """Name -> module for every backend importable in this process."""
    backends = {"python": python_backend}
    if compiled_backend is not None:
        backends["cython"] = compiled_backend
    return backends
