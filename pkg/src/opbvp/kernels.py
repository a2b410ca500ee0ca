"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``OPBVP_PURE_PYTHON`` is set to a non-empty value, the
numpy fallback is used. ``BACKEND`` names the active choice.
"""

import os

from . import _pykernels

if os.environ.get("OPBVP_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

rk4_propagate = _impl.rk4_propagate
cumulative_quadrature = _impl.cumulative_quadrature
