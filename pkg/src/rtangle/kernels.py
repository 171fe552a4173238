"""Backend selection for the convex-roof hot kernels.

The compiled extension is preferred when importable; the pure-numpy twin
is the fallback.  Set ``RTANGLE_BACKEND=python`` to force the fallback
(used by the benchmark and for debugging).
"""
from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
if os.environ.get("RTANGLE_BACKEND", "").lower() != "python":
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

hyperdet_rows = _impl.hyperdet_rows
roof_value = _impl.roof_value
roof_value_grad = _impl.roof_value_grad
polar_retract = _impl.polar_retract
