"""Kernel backend selection: compiled extension if available, NumPy otherwise.

Set ``TWOWELL_FORCE_NUMPY=1`` to skip the extension (used by the benchmark
to compare both backends in one process via explicit module access).
"""

from __future__ import annotations

import os

from . import _kernels_np

if os.environ.get("TWOWELL_FORCE_NUMPY"):
    _impl = _kernels_np
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_np

dist2_two_wells = _impl.dist2_two_wells
dist2_two_wells_grad = _impl.dist2_two_wells_grad


def backend_name() -> str:
    return "cython" if _impl.__name__.endswith("_kernels") else "numpy"
