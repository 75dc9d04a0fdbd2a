"""Backend selection for the pattern kernels.

The compiled extension is used when it imports; otherwise the NumPy
versions are used. Set ``FORMBEAM_PURE_PYTHON=1`` to force the fallback.
"""

import os

from formbeam import _kernels_py

if os.environ.get("FORMBEAM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from formbeam import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

array_factor = _impl.array_factor
array_factor_power = _impl.array_factor_power
grid_array_factor = _impl.grid_array_factor
