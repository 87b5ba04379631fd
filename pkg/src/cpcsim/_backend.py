"""Select the Monte Carlo kernel at import.

The compiled extension is used when importable; set ``CPCSIM_BACKEND=numpy``
to force the NumPy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("CPCSIM_BACKEND", "").lower() in ("numpy", "python", "fallback"):
    kernels, BACKEND = _kernels_py, "numpy"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels, BACKEND = _kernels_py, "numpy"

sample_minima = kernels.sample_minima

__all__ = ["BACKEND", "kernels", "sample_minima"]
